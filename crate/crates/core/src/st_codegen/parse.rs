//! Lexer and parser for the Structured Text subset.

use super::interp::Value;
use super::StError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Assign,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    DotDot,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(v) => v.to_string(),
            Tok::Real(v) => v.to_string(),
            Tok::Assign => ":=".into(),
            Tok::Colon => ":".into(),
            Tok::Semi => ";".into(),
            Tok::Comma => ",".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::DotDot => "..".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Eq => "=".into(),
            Tok::Ne => "<>".into(),
            Tok::Lt => "<".into(),
            Tok::Le => "<=".into(),
            Tok::Gt => ">".into(),
            Tok::Ge => ">=".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Words of the language that the subset does not implement.
const UNSUPPORTED: &[&str] = &[
    "WHILE",
    "REPEAT",
    "UNTIL",
    "CASE",
    "EXIT",
    "RETURN",
    "CONTINUE",
    "FUNCTION",
    "PROGRAM",
    "METHOD",
    "VAR_IN_OUT",
    "VAR_GLOBAL",
    "VAR_EXTERNAL",
    "VAR_TEMP",
    "RETAIN",
    "STRUCT",
    "TYPE",
    "POINTER",
    "REF",
    "STRING",
    "WSTRING",
    "TIME",
    "SINT",
    "UINT",
    "UDINT",
    "ULINT",
    "LINT",
    "USINT",
    "BYTE",
    "WORD",
    "DWORD",
    "LWORD",
    "JMP",
    "AT",
];

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, StError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(StError::Syntax {
                        message: "unterminated comment".into(),
                        line: pos.line,
                        col: pos.col,
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i]
                .iter()
                .collect::<String>()
                .to_ascii_uppercase();
            if UNSUPPORTED.contains(&word.as_str()) {
                return Err(StError::Unsupported {
                    token: word,
                    line: pos.line,
                    col: pos.col,
                });
            }
            out.push((Tok::Ident(word), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    real = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(text.parse().expect("lexed real"))
            } else {
                Tok::Int(text.parse().map_err(|_| StError::Syntax {
                    message: format!("integer literal {text} out of range"),
                    line: pos.line,
                    col: pos.col,
                })?)
            };
            out.push((tok, pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', Some('>')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('<', _) => (Tok::Lt, 1),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(StError::Unsupported {
                    token: c.to_string(),
                    line,
                    col,
                })
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Base {
    Bool,
    Int,
    Dint,
    Real,
    Lreal,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Type {
    pub base: Base,
    /// Inclusive (lower, upper) per dimension; empty for scalars.
    pub dims: Vec<(i64, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Section {
    Input,
    Output,
    Local,
    Constant,
}

#[derive(Debug, Clone)]
pub(crate) struct Decl {
    pub name: String,
    pub section: Section,
    pub ty: Type,
    pub init: Option<Vec<Expr>>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BinOp {
    Or,
    Xor,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

#[derive(Debug, Clone)]
pub(crate) enum Expr {
    Lit(Value),
    Var {
        name: String,
        index: Vec<Expr>,
        pos: Pos,
    },
    Neg(Box<Expr>, Pos),
    Not(Box<Expr>, Pos),
    Bin(BinOp, Box<Expr>, Box<Expr>, Pos),
}

#[derive(Debug, Clone)]
pub(crate) enum Stmt {
    Assign {
        name: String,
        index: Vec<Expr>,
        value: Expr,
        pos: Pos,
    },
    If {
        branches: Vec<(Expr, Pos, Vec<Stmt>)>,
        otherwise: Vec<Stmt>,
    },
    For {
        var: String,
        from: Expr,
        to: Expr,
        by: Option<Expr>,
        body: Vec<Stmt>,
        pos: Pos,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub name: String,
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

pub(crate) struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, StError> {
        Ok(Self {
            toks: lex(src)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, StError> {
        let p = self.pos();
        Err(StError::Syntax {
            message: format!("expected {wanted}, found '{}'", self.peek().text()),
            line: p.line,
            col: p.col,
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, StError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            self.unexpected(&format!("'{}'", tok.text()))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), StError> {
        if self.is_kw(kw) {
            self.advance();
            Ok(())
        } else {
            self.unexpected(kw)
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), StError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                let p = self.advance().1;
                Ok((s, p))
            }
            _ => self.unexpected("identifier"),
        }
    }

    /// Parses the whole source as a sequence of function blocks.
    pub(crate) fn blocks(mut self) -> Result<Vec<Block>, StError> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            out.push(self.block()?);
        }
        Ok(out)
    }

    fn block(&mut self) -> Result<Block, StError> {
        if !self.is_kw("FUNCTION_BLOCK") {
            let p = self.pos();
            return Err(StError::Unsupported {
                token: self.peek().text(),
                line: p.line,
                col: p.col,
            });
        }
        self.advance();
        let (name, _) = self.ident()?;
        let mut decls = Vec::new();
        loop {
            let section = if self.is_kw("VAR_INPUT") {
                Section::Input
            } else if self.is_kw("VAR_OUTPUT") {
                Section::Output
            } else if self.is_kw("VAR") {
                Section::Local
            } else {
                break;
            };
            self.advance();
            let section = if section == Section::Local && self.is_kw("CONSTANT") {
                self.advance();
                Section::Constant
            } else {
                section
            };
            while !self.is_kw("END_VAR") {
                self.decl(section, &mut decls)?;
            }
            self.advance();
        }
        let body = self.stmts(&["END_FUNCTION_BLOCK"])?;
        self.expect_kw("END_FUNCTION_BLOCK")?;
        Ok(Block { name, decls, body })
    }

    fn decl(&mut self, section: Section, out: &mut Vec<Decl>) -> Result<(), StError> {
        let mut names = vec![self.ident()?];
        while *self.peek() == Tok::Comma {
            self.advance();
            names.push(self.ident()?);
        }
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        let init = if *self.peek() == Tok::Assign {
            self.advance();
            if *self.peek() == Tok::LBracket {
                self.advance();
                let mut items = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.advance();
                    items.push(self.expr()?);
                }
                self.expect(Tok::RBracket)?;
                Some(items)
            } else {
                Some(vec![self.expr()?])
            }
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        for (name, pos) in names {
            out.push(Decl {
                name,
                section,
                ty: ty.clone(),
                init: init.clone(),
                pos,
            });
        }
        Ok(())
    }

    fn bound(&mut self) -> Result<i64, StError> {
        let neg = if *self.peek() == Tok::Minus {
            self.advance();
            true
        } else {
            false
        };
        match self.advance() {
            (Tok::Int(v), _) => Ok(if neg { -v } else { v }),
            (t, p) => Err(StError::Syntax {
                message: format!(
                    "array bound must be an integer literal, found '{}'",
                    t.text()
                ),
                line: p.line,
                col: p.col,
            }),
        }
    }

    fn ty(&mut self) -> Result<Type, StError> {
        let mut dims = Vec::new();
        if self.is_kw("ARRAY") {
            self.advance();
            self.expect(Tok::LBracket)?;
            loop {
                let p = self.pos();
                let lo = self.bound()?;
                self.expect(Tok::DotDot)?;
                let hi = self.bound()?;
                if hi < lo {
                    return Err(StError::Syntax {
                        message: format!("empty array range {lo}..{hi}"),
                        line: p.line,
                        col: p.col,
                    });
                }
                dims.push((lo, hi));
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
            self.expect_kw("OF")?;
        }
        let (tok, p) = self.advance();
        let base = match &tok {
            Tok::Ident(s) => match s.as_str() {
                "BOOL" => Base::Bool,
                "INT" => Base::Int,
                "DINT" => Base::Dint,
                "REAL" => Base::Real,
                "LREAL" => Base::Lreal,
                _ => {
                    return Err(StError::Unsupported {
                        token: s.clone(),
                        line: p.line,
                        col: p.col,
                    })
                }
            },
            _ => {
                return Err(StError::Syntax {
                    message: format!("expected a type, found '{}'", tok.text()),
                    line: p.line,
                    col: p.col,
                })
            }
        };
        Ok(Type { base, dims })
    }

    fn stmts(&mut self, terminators: &[&str]) -> Result<Vec<Stmt>, StError> {
        let mut out = Vec::new();
        loop {
            if terminators.iter().any(|t| self.is_kw(t)) {
                return Ok(out);
            }
            if *self.peek() == Tok::Eof {
                return self.unexpected(terminators[0]);
            }
            if *self.peek() == Tok::Semi {
                self.advance();
                continue;
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> Result<Stmt, StError> {
        if self.is_kw("IF") {
            self.advance();
            let mut branches = Vec::new();
            let p = self.pos();
            let cond = self.expr()?;
            self.expect_kw("THEN")?;
            let body = self.stmts(&["ELSIF", "ELSE", "END_IF"])?;
            branches.push((cond, p, body));
            let mut otherwise = Vec::new();
            loop {
                if self.is_kw("ELSIF") {
                    self.advance();
                    let p = self.pos();
                    let cond = self.expr()?;
                    self.expect_kw("THEN")?;
                    let body = self.stmts(&["ELSIF", "ELSE", "END_IF"])?;
                    branches.push((cond, p, body));
                } else if self.is_kw("ELSE") {
                    self.advance();
                    otherwise = self.stmts(&["END_IF"])?;
                } else {
                    break;
                }
            }
            self.expect_kw("END_IF")?;
            self.expect(Tok::Semi)?;
            return Ok(Stmt::If {
                branches,
                otherwise,
            });
        }
        if self.is_kw("FOR") {
            let pos = self.advance().1;
            let (var, _) = self.ident()?;
            self.expect(Tok::Assign)?;
            let from = self.expr()?;
            self.expect_kw("TO")?;
            let to = self.expr()?;
            let by = if self.is_kw("BY") {
                self.advance();
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_kw("DO")?;
            let body = self.stmts(&["END_FOR"])?;
            self.expect_kw("END_FOR")?;
            self.expect(Tok::Semi)?;
            return Ok(Stmt::For {
                var,
                from,
                to,
                by,
                body,
                pos,
            });
        }
        if let Tok::Ident(s) = self.peek() {
            if is_reserved(s) {
                let p = self.pos();
                return Err(StError::Unsupported {
                    token: s.clone(),
                    line: p.line,
                    col: p.col,
                });
            }
        }
        let (name, pos) = self.ident()?;
        let index = self.index()?;
        self.expect(Tok::Assign)?;
        let value = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(Stmt::Assign {
            name,
            index,
            value,
            pos,
        })
    }

    fn index(&mut self) -> Result<Vec<Expr>, StError> {
        let mut index = Vec::new();
        if *self.peek() == Tok::LBracket {
            self.advance();
            index.push(self.expr()?);
            while *self.peek() == Tok::Comma {
                self.advance();
                index.push(self.expr()?);
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(index)
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, StError> {
        self.binary(0)
    }

    fn op_at(&self, level: usize) -> Option<BinOp> {
        let t = self.peek();
        let kw = |k: &str| matches!(t, Tok::Ident(s) if s == k);
        match level {
            0 if kw("OR") => Some(BinOp::Or),
            1 if kw("XOR") => Some(BinOp::Xor),
            2 if kw("AND") => Some(BinOp::And),
            3 => match t {
                Tok::Eq => Some(BinOp::Eq),
                Tok::Ne => Some(BinOp::Ne),
                _ => None,
            },
            4 => match t {
                Tok::Lt => Some(BinOp::Lt),
                Tok::Le => Some(BinOp::Le),
                Tok::Gt => Some(BinOp::Gt),
                Tok::Ge => Some(BinOp::Ge),
                _ => None,
            },
            5 => match t {
                Tok::Plus => Some(BinOp::Add),
                Tok::Minus => Some(BinOp::Sub),
                _ => None,
            },
            6 => match t {
                Tok::Star => Some(BinOp::Mul),
                Tok::Slash => Some(BinOp::Div),
                _ if kw("MOD") => Some(BinOp::Mod),
                _ => None,
            },
            _ => None,
        }
    }

    fn binary(&mut self, level: usize) -> Result<Expr, StError> {
        if level > 6 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.op_at(level) {
            let pos = self.advance().1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, StError> {
        if *self.peek() == Tok::Minus {
            let pos = self.advance().1;
            return Ok(Expr::Neg(Box::new(self.unary()?), pos));
        }
        if self.is_kw("NOT") {
            let pos = self.advance().1;
            return Ok(Expr::Not(Box::new(self.unary()?), pos));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, StError> {
        let (tok, pos) = (self.peek().clone(), self.pos());
        match tok {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::Lit(Value::Int(v)))
            }
            Tok::Real(v) => {
                self.advance();
                Ok(Expr::Lit(Value::Real(v)))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "TRUE" || s == "FALSE" => {
                self.advance();
                Ok(Expr::Lit(Value::Bool(s == "TRUE")))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.advance();
                if *self.peek() == Tok::LParen {
                    // function calls are outside the subset
                    return Err(StError::Unsupported {
                        token: format!("{s}("),
                        line: pos.line,
                        col: pos.col,
                    });
                }
                let index = self.index()?;
                Ok(Expr::Var {
                    name: s,
                    index,
                    pos,
                })
            }
            Tok::Ident(s) => Err(StError::Unsupported {
                token: s,
                line: pos.line,
                col: pos.col,
            }),
            _ => self.unexpected("an expression"),
        }
    }
}

fn is_reserved(word: &str) -> bool {
    matches!(
        word,
        "FUNCTION_BLOCK"
            | "END_FUNCTION_BLOCK"
            | "VAR"
            | "VAR_INPUT"
            | "VAR_OUTPUT"
            | "END_VAR"
            | "CONSTANT"
            | "ARRAY"
            | "OF"
            | "IF"
            | "THEN"
            | "ELSIF"
            | "ELSE"
            | "END_IF"
            | "FOR"
            | "TO"
            | "BY"
            | "DO"
            | "END_FOR"
            | "AND"
            | "OR"
            | "XOR"
            | "NOT"
            | "MOD"
            | "TRUE"
            | "FALSE"
            | "BOOL"
            | "INT"
            | "DINT"
            | "REAL"
            | "LREAL"
    )
}
