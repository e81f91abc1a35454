//! Tree-walking evaluator for one function-block invocation.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::parse::{Base, BinOp, Block, Decl, Expr, Pos, Section, Stmt, Type};
use super::StError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Value {
    fn kind(self) -> &'static str {
        match self {
            Value::Bool(_) => "BOOL",
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
        }
    }
}

/// A variable's value as seen from outside the block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StVar {
    Scalar(Value),
    /// Row-major data with inclusive bounds per dimension.
    Array {
        dims: Vec<(i64, i64)>,
        data: Vec<Value>,
    },
}

pub type StVars = BTreeMap<String, StVar>;

impl StVar {
    /// 1-D array indexed from 0.
    pub fn array(values: impl IntoIterator<Item = Value>) -> Self {
        let data: Vec<Value> = values.into_iter().collect();
        StVar::Array {
            dims: vec![(0, data.len() as i64 - 1)],
            data,
        }
    }

    pub fn bools(values: impl IntoIterator<Item = bool>) -> Self {
        Self::array(values.into_iter().map(Value::Bool))
    }

    pub fn reals(values: impl IntoIterator<Item = f64>) -> Self {
        Self::array(values.into_iter().map(Value::Real))
    }

    pub fn ints(values: impl IntoIterator<Item = i64>) -> Self {
        Self::array(values.into_iter().map(Value::Int))
    }

    pub fn scalar(&self) -> Option<Value> {
        match self {
            StVar::Scalar(v) => Some(*v),
            StVar::Array { .. } => None,
        }
    }

    /// Element at `index`, `None` when out of bounds or not an array.
    pub fn at(&self, index: &[i64]) -> Option<Value> {
        match self {
            StVar::Array { dims, data } => offset(dims, index).map(|o| data[o]),
            StVar::Scalar(_) => None,
        }
    }
}

fn offset(dims: &[(i64, i64)], index: &[i64]) -> Option<usize> {
    if dims.len() != index.len() {
        return None;
    }
    let mut off = 0usize;
    for (&(lo, hi), &i) in dims.iter().zip(index) {
        if i < lo || i > hi {
            return None;
        }
        off = off * (hi - lo + 1) as usize + (i - lo) as usize;
    }
    Some(off)
}

struct Slot {
    section: Section,
    ty: Type,
    data: Vec<Value>,
}

fn default_of(base: Base) -> Value {
    match base {
        Base::Bool => Value::Bool(false),
        Base::Int | Base::Dint => Value::Int(0),
        Base::Real | Base::Lreal => Value::Real(0.0),
    }
}

fn type_name(base: Base) -> &'static str {
    match base {
        Base::Bool => "BOOL",
        Base::Int => "INT",
        Base::Dint => "DINT",
        Base::Real => "REAL",
        Base::Lreal => "LREAL",
    }
}

/// Checks and narrows `v` for storage in a variable of type `base`.
fn coerce(base: Base, v: Value) -> Result<Value, String> {
    match (base, v) {
        (Base::Bool, Value::Bool(_)) => Ok(v),
        (Base::Int, Value::Int(i)) if i16::try_from(i).is_ok() => Ok(v),
        (Base::Dint, Value::Int(i)) if i32::try_from(i).is_ok() => Ok(v),
        (Base::Int | Base::Dint, Value::Int(i)) => {
            Err(format!("{i} out of range for {}", type_name(base)))
        }
        (Base::Real, Value::Real(r)) => Ok(Value::Real(r as f32 as f64)),
        (Base::Lreal, Value::Real(_)) => Ok(v),
        _ => Err(format!(
            "cannot store {} value in {}",
            v.kind(),
            type_name(base)
        )),
    }
}

struct Machine {
    slots: Vec<Slot>,
    names: HashMap<String, usize>,
}

fn type_err(message: impl Into<String>, pos: Pos) -> StError {
    StError::Type {
        message: message.into(),
        line: pos.line,
        col: pos.col,
    }
}

fn runtime(message: impl Into<String>, pos: Pos) -> StError {
    StError::Runtime {
        message: message.into(),
        line: pos.line,
        col: pos.col,
    }
}

impl Machine {
    fn slot(&self, name: &str, pos: Pos) -> Result<usize, StError> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| runtime(format!("undeclared variable {name}"), pos))
    }

    fn locate(&mut self, name: &str, index: &[Expr], pos: Pos) -> Result<(usize, usize), StError> {
        let s = self.slot(name, pos)?;
        let dims = self.slots[s].ty.dims.clone();
        if dims.len() != index.len() {
            return Err(type_err(
                format!(
                    "{name} has {} dimension(s), indexed with {}",
                    dims.len(),
                    index.len()
                ),
                pos,
            ));
        }
        let mut idx = Vec::with_capacity(index.len());
        for e in index {
            match self.eval(e)? {
                Value::Int(i) => idx.push(i),
                v => {
                    return Err(type_err(
                        format!("array index must be integer, got {}", v.kind()),
                        pos,
                    ))
                }
            }
        }
        let off = offset(&dims, &idx)
            .ok_or_else(|| runtime(format!("index {idx:?} out of bounds for {name}"), pos))?;
        Ok((s, off))
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, StError> {
        match e {
            Expr::Lit(v) => Ok(*v),
            Expr::Var { name, index, pos } => {
                let (s, off) = self.locate(name, index, *pos)?;
                Ok(self.slots[s].data[off])
            }
            Expr::Neg(inner, pos) => match self.eval(inner)? {
                Value::Int(i) => i
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or_else(|| runtime("integer overflow", *pos)),
                Value::Real(r) => Ok(Value::Real(-r)),
                v => Err(type_err(format!("cannot negate {}", v.kind()), *pos)),
            },
            Expr::Not(inner, pos) => match self.eval(inner)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => Err(type_err(format!("NOT needs BOOL, got {}", v.kind()), *pos)),
            },
            Expr::Bin(op, l, r, pos) => {
                // both operands are always evaluated, left first
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                binary(*op, a, b, *pos)
            }
        }
    }

    fn exec(&mut self, stmts: &[Stmt]) -> Result<(), StError> {
        for s in stmts {
            match s {
                Stmt::Assign {
                    name,
                    index,
                    value,
                    pos,
                } => {
                    let (slot, off) = self.locate(name, index, *pos)?;
                    if self.slots[slot].section == Section::Constant {
                        return Err(runtime(format!("assignment to constant {name}"), *pos));
                    }
                    let v = self.eval(value)?;
                    let v = coerce(self.slots[slot].ty.base, v).map_err(|m| type_err(m, *pos))?;
                    self.slots[slot].data[off] = v;
                }
                Stmt::If {
                    branches,
                    otherwise,
                } => {
                    let mut taken = false;
                    for (cond, pos, body) in branches {
                        match self.eval(cond)? {
                            Value::Bool(true) => {
                                self.exec(body)?;
                                taken = true;
                                break;
                            }
                            Value::Bool(false) => {}
                            v => {
                                return Err(type_err(
                                    format!("IF condition must be BOOL, got {}", v.kind()),
                                    *pos,
                                ))
                            }
                        }
                    }
                    if !taken {
                        self.exec(otherwise)?;
                    }
                }
                Stmt::For {
                    var,
                    from,
                    to,
                    by,
                    body,
                    pos,
                } => {
                    let slot = self.slot(var, *pos)?;
                    if !self.slots[slot].ty.dims.is_empty()
                        || !matches!(self.slots[slot].ty.base, Base::Int | Base::Dint)
                    {
                        return Err(type_err(
                            format!("FOR variable {var} must be an integer scalar"),
                            *pos,
                        ));
                    }
                    let int = |m: &mut Self, e: &Expr| match m.eval(e)? {
                        Value::Int(i) => Ok(i),
                        v => Err(type_err(
                            format!("FOR bound must be integer, got {}", v.kind()),
                            *pos,
                        )),
                    };
                    let start = int(self, from)?;
                    let end = int(self, to)?;
                    let step = match by {
                        Some(e) => int(self, e)?,
                        None => 1,
                    };
                    if step == 0 {
                        return Err(runtime("FOR step of zero", *pos));
                    }
                    let base = self.slots[slot].ty.base;
                    let mut i = start;
                    while (step > 0 && i <= end) || (step < 0 && i >= end) {
                        self.slots[slot].data[0] =
                            coerce(base, Value::Int(i)).map_err(|m| runtime(m, *pos))?;
                        self.exec(body)?;
                        i = match i.checked_add(step) {
                            Some(n) => n,
                            None => break,
                        };
                    }
                }
            }
        }
        Ok(())
    }

    fn declare(&mut self, d: &Decl) -> Result<(), StError> {
        if self.names.contains_key(&d.name) {
            return Err(StError::Syntax {
                message: format!("{} declared twice", d.name),
                line: d.pos.line,
                col: d.pos.col,
            });
        }
        let len: usize =
            d.ty.dims
                .iter()
                .map(|&(lo, hi)| (hi - lo + 1) as usize)
                .product();
        let mut data = vec![default_of(d.ty.base); len];
        if let Some(init) = &d.init {
            if init.len() > len {
                return Err(type_err(
                    format!(
                        "{} initializer has {} items for {len} elements",
                        d.name,
                        init.len()
                    ),
                    d.pos,
                ));
            }
            if d.ty.dims.is_empty() && init.len() != 1 {
                return Err(type_err(format!("{} is not an array", d.name), d.pos));
            }
            for (slot, e) in data.iter_mut().zip(init) {
                let v = self.eval(e)?;
                *slot = coerce(d.ty.base, v).map_err(|m| type_err(m, d.pos))?;
            }
        }
        self.names.insert(d.name.clone(), self.slots.len());
        self.slots.push(Slot {
            section: d.section,
            ty: d.ty.clone(),
            data,
        });
        Ok(())
    }

    fn bind(&mut self, name: &str, var: &StVar) -> Result<(), StError> {
        let bad = |m: String| StError::Binding(format!("{name}: {m}"));
        let s = *self
            .names
            .get(name)
            .ok_or_else(|| bad("no such input".into()))?;
        let slot = &mut self.slots[s];
        if slot.section != Section::Input {
            return Err(bad("not a VAR_INPUT".into()));
        }
        let base = slot.ty.base;
        match var {
            StVar::Scalar(v) if slot.ty.dims.is_empty() => {
                slot.data[0] = coerce(base, *v).map_err(bad)?;
            }
            StVar::Array { dims, data }
                if *dims == slot.ty.dims && data.len() == slot.data.len() =>
            {
                for (dst, v) in slot.data.iter_mut().zip(data) {
                    *dst = coerce(base, *v).map_err(bad)?;
                }
            }
            _ => {
                return Err(bad(format!(
                    "shape does not match declaration {:?}",
                    slot.ty.dims
                )))
            }
        }
        Ok(())
    }

    fn export(&self, s: usize) -> StVar {
        let slot = &self.slots[s];
        if slot.ty.dims.is_empty() {
            StVar::Scalar(slot.data[0])
        } else {
            StVar::Array {
                dims: slot.ty.dims.clone(),
                data: slot.data.clone(),
            }
        }
    }
}

fn binary(op: BinOp, a: Value, b: Value, pos: Pos) -> Result<Value, StError> {
    use Value::*;
    let mismatch = || {
        type_err(
            format!(
                "operator {op:?} not defined for {} and {}",
                a.kind(),
                b.kind()
            ),
            pos,
        )
    };
    let overflow = || runtime("integer overflow", pos);
    Ok(match (op, a, b) {
        (BinOp::Or, Bool(x), Bool(y)) => Bool(x | y),
        (BinOp::Xor, Bool(x), Bool(y)) => Bool(x ^ y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(x & y),
        (BinOp::Eq, Bool(x), Bool(y)) => Bool(x == y),
        (BinOp::Ne, Bool(x), Bool(y)) => Bool(x != y),
        (BinOp::Eq, Int(x), Int(y)) => Bool(x == y),
        (BinOp::Ne, Int(x), Int(y)) => Bool(x != y),
        (BinOp::Lt, Int(x), Int(y)) => Bool(x < y),
        (BinOp::Le, Int(x), Int(y)) => Bool(x <= y),
        (BinOp::Gt, Int(x), Int(y)) => Bool(x > y),
        (BinOp::Ge, Int(x), Int(y)) => Bool(x >= y),
        (BinOp::Eq, Real(x), Real(y)) => Bool(x == y),
        (BinOp::Ne, Real(x), Real(y)) => Bool(x != y),
        (BinOp::Lt, Real(x), Real(y)) => Bool(x < y),
        (BinOp::Le, Real(x), Real(y)) => Bool(x <= y),
        (BinOp::Gt, Real(x), Real(y)) => Bool(x > y),
        (BinOp::Ge, Real(x), Real(y)) => Bool(x >= y),
        (BinOp::Add, Int(x), Int(y)) => Int(x.checked_add(y).ok_or_else(overflow)?),
        (BinOp::Sub, Int(x), Int(y)) => Int(x.checked_sub(y).ok_or_else(overflow)?),
        (BinOp::Mul, Int(x), Int(y)) => Int(x.checked_mul(y).ok_or_else(overflow)?),
        (BinOp::Div | BinOp::Mod, Int(_), Int(0)) => return Err(runtime("division by zero", pos)),
        (BinOp::Div, Int(x), Int(y)) => Int(x.checked_div(y).ok_or_else(overflow)?),
        (BinOp::Mod, Int(x), Int(y)) => Int(x.checked_rem(y).ok_or_else(overflow)?),
        (BinOp::Add, Real(x), Real(y)) => Real(x + y),
        (BinOp::Sub, Real(x), Real(y)) => Real(x - y),
        (BinOp::Mul, Real(x), Real(y)) => Real(x * y),
        (BinOp::Div, Real(x), Real(y)) => Real(x / y),
        _ => return Err(mismatch()),
    })
}

/// Runs `block` once. Inputs not supplied keep their declared initial value.
/// Returns every VAR_OUTPUT.
pub(crate) fn run_block(block: &Block, inputs: &StVars) -> Result<StVars, StError> {
    let mut m = Machine {
        slots: Vec::new(),
        names: HashMap::new(),
    };
    for d in &block.decls {
        m.declare(d)?;
    }
    for (name, var) in inputs {
        m.bind(&name.to_ascii_uppercase(), var)?;
    }
    m.exec(&block.body)?;
    Ok(block
        .decls
        .iter()
        .filter(|d| d.section == Section::Output)
        .map(|d| (d.name.clone(), m.export(m.names[&d.name])))
        .collect())
}
