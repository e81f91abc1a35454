//! IEC 61131-3 Structured Text export of the load-selection and
//! event-detection logic, and an interpreter for the emitted subset.
//!
//! The plant structure (busbar membership, buildings, event list, default
//! priorities) is baked into constant arrays; breaker states and
//! measurements are block inputs. Arrays are declared from index 0 so a plant
//! with no loads or busties still yields valid declarations; element 0 is
//! unused.

mod emit;
mod interp;
mod parse;

use serde::Serialize;
use thiserror::Error;

pub use interp::{StVar, StVars, Value};

use crate::grid_model::{enumerate_events, validate_config, Event, GridConfig, NetworkSnapshot};
use crate::lse::SheddingMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StError {
    #[error("unsupported construct '{token}' at {line}:{col}")]
    Unsupported {
        token: String,
        line: usize,
        col: usize,
    },
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("type error at {line}:{col}: {message}")]
    Type {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("runtime error at {line}:{col}: {message}")]
    Runtime {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("input binding: {0}")]
    Binding(String),
    #[error("no function block named {0}")]
    NoSuchBlock(String),
    #[error("configuration rejected: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    pub lse_block: String,
    pub edsa_block: String,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            lse_block: "FLS_LSE".into(),
            edsa_block: "FLS_EDSA".into(),
        }
    }
}

/// Index assignment used by the emitted text: position `i` in each list is
/// array index `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StLayout {
    pub busbars: Vec<String>,
    pub busties: Vec<String>,
    pub generators: Vec<String>,
    pub buildings: Vec<String>,
    pub loads: Vec<String>,
    /// Event labels in catalog order.
    pub events: Vec<String>,
}

impl StLayout {
    pub fn new(config: &GridConfig) -> Self {
        Self {
            busbars: config.busbars.iter().map(|b| b.id.to_string()).collect(),
            busties: config.busties.iter().map(|t| t.id.to_string()).collect(),
            generators: config.generators.iter().map(|g| g.id.to_string()).collect(),
            buildings: config.buildings().iter().map(|b| b.to_string()).collect(),
            loads: config.loads.iter().map(|l| l.id.to_string()).collect(),
            events: enumerate_events(config).labels(),
        }
    }

    /// EVENT_KIND and EVENT_TARGET arrays, element 0 unused.
    fn event_codes(&self, config: &GridConfig) -> (Vec<i64>, Vec<i64>) {
        let pos = |list: &[String], id: &str| {
            list.iter()
                .position(|x| x == id)
                .map_or(0, |i| i as i64 + 1)
        };
        let mut kinds = vec![0];
        let mut targets = vec![0];
        for e in enumerate_events(config).events() {
            let (k, t) = match e {
                Event::GeneratorTrip(id) => (1, pos(&self.generators, id.as_str())),
                Event::BustieOpen(id) => (2, pos(&self.busties, id.as_str())),
                Event::BuildingLoss(id) => (3, pos(&self.buildings, id.as_str())),
                Event::GridBlackout(_) => (4, 0),
            };
            kinds.push(k);
            targets.push(t);
        }
        (kinds, targets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StProgram {
    pub source: String,
    pub n_gens: usize,
    pub n_loads: usize,
    pub n_busbars: usize,
    pub n_busties: usize,
    pub n_events: usize,
    pub n_buildings: usize,
    pub lse_block: String,
    pub edsa_block: String,
    pub layout: StLayout,
}

/// Emits both function blocks for `config`. The text depends only on the
/// configuration and the options.
pub fn emit_st(config: &GridConfig, options: &EmitOptions) -> Result<StProgram, StError> {
    let report = validate_config(config);
    if !report.is_valid() {
        return Err(StError::InvalidConfig(
            report.findings.iter().map(|f| f.to_string()).collect(),
        ));
    }
    Ok(emit::emit(config, options))
}

/// Runs one invocation of the function block `block` found in `source`.
pub fn interpret_source(source: &str, block: &str, inputs: &StVars) -> Result<StVars, StError> {
    let blocks = parse::Parser::new(source)?.blocks()?;
    let wanted = block.to_ascii_uppercase();
    let b = blocks
        .iter()
        .find(|b| b.name == wanted)
        .ok_or_else(|| StError::NoSuchBlock(block.to_owned()))?;
    interp::run_block(b, inputs)
}

pub fn interpret_st(program: &StProgram, block: &str, inputs: &StVars) -> Result<StVars, StError> {
    interpret_source(&program.source, block, inputs)
}

fn padded<T>(zero: T, items: impl IntoIterator<Item = T>) -> impl Iterator<Item = T> {
    std::iter::once(zero).chain(items)
}

/// Inputs of the load-selection block for `snapshot`. Priorities come from
/// the snapshot (overrides included).
pub fn lse_inputs(config: &GridConfig, snapshot: &NetworkSnapshot) -> StVars {
    let gen = |f: &dyn Fn(&crate::grid_model::GeneratorReading) -> f64| {
        StVar::reals(padded(
            0.0,
            config
                .generators
                .iter()
                .map(|g| snapshot.generators.get(&g.id).map_or(0.0, f)),
        ))
    };
    let mut v = StVars::new();
    v.insert(
        "GEN_CLOSED".into(),
        StVar::bools(padded(
            false,
            config
                .generators
                .iter()
                .map(|g| snapshot.generator_closed(&g.id)),
        )),
    );
    v.insert("GEN_P".into(), gen(&|r| r.power));
    v.insert("GEN_SR".into(), gen(&|r| r.sr));
    v.insert(
        "LOAD_CLOSED".into(),
        StVar::bools(padded(
            false,
            config.loads.iter().map(|l| snapshot.load_closed(&l.id)),
        )),
    );
    v.insert(
        "LOAD_P".into(),
        StVar::reals(padded(
            0.0,
            config
                .loads
                .iter()
                .map(|l| snapshot.loads.get(&l.id).map_or(0.0, |r| r.power)),
        )),
    );
    v.insert(
        "PRIORITY".into(),
        StVar::ints(padded(
            0,
            config
                .loads
                .iter()
                .map(|l| i64::from(snapshot.priority_of(l))),
        )),
    );
    v.insert(
        "BT_CLOSED".into(),
        StVar::bools(padded(
            false,
            config.busties.iter().map(|t| snapshot.bustie_closed(&t.id)),
        )),
    );
    v.insert(
        "TIE_CLOSED".into(),
        StVar::Scalar(Value::Bool(snapshot.tie_closed())),
    );
    v.insert(
        "IMPORT_P".into(),
        StVar::Scalar(Value::Real(snapshot.imported_power)),
    );
    v
}

/// Inputs of the detection block for the transition `prev` to `next`.
/// `sm` is indexed like the emitted SM output (loads x events, from 0).
pub fn edsa_inputs(
    config: &GridConfig,
    prev: &NetworkSnapshot,
    next: &NetworkSnapshot,
    sm: &StVar,
    armed: bool,
) -> StVars {
    let gens = |s: &NetworkSnapshot| {
        StVar::bools(padded(
            false,
            config.generators.iter().map(|g| s.generator_closed(&g.id)),
        ))
    };
    let ties = |s: &NetworkSnapshot| {
        StVar::bools(padded(
            false,
            config.busties.iter().map(|t| s.bustie_closed(&t.id)),
        ))
    };
    let mut v = StVars::new();
    v.insert("PREV_GEN_CLOSED".into(), gens(prev));
    v.insert("GEN_CLOSED".into(), gens(next));
    v.insert("PREV_BT_CLOSED".into(), ties(prev));
    v.insert("BT_CLOSED".into(), ties(next));
    v.insert(
        "PREV_TIE_CLOSED".into(),
        StVar::Scalar(Value::Bool(prev.tie_closed())),
    );
    v.insert(
        "TIE_CLOSED".into(),
        StVar::Scalar(Value::Bool(next.tie_closed())),
    );
    v.insert(
        "LOAD_CLOSED".into(),
        StVar::bools(padded(
            false,
            config.loads.iter().map(|l| next.load_closed(&l.id)),
        )),
    );
    v.insert("SM".into(), sm.clone());
    v.insert("ARMED".into(), StVar::Scalar(Value::Bool(armed)));
    v
}

/// A native matrix in the shape of the SM array.
pub fn sm_var(matrix: &SheddingMatrix) -> StVar {
    let (rows, cols) = (matrix.n_rows(), matrix.n_cols());
    let mut data = vec![Value::Bool(false); (rows + 1) * (cols + 1)];
    for r in 0..rows {
        for c in 0..cols {
            data[(r + 1) * (cols + 1) + c + 1] = Value::Bool(matrix.get(r, c));
        }
    }
    StVar::Array {
        dims: vec![(0, rows as i64), (0, cols as i64)],
        data,
    }
}

/// Rows of the SM output (loads x events, element 0 dropped).
pub fn sm_rows(sm: &StVar, n_loads: usize, n_events: usize) -> Vec<Vec<bool>> {
    (1..=n_loads as i64)
        .map(|l| {
            (1..=n_events as i64)
                .map(|e| matches!(sm.at(&[l, e]), Some(Value::Bool(true))))
                .collect()
        })
        .collect()
}

/// Elements 1..=n of a BOOL array output.
pub fn bool_list(var: &StVar, n: usize) -> Vec<bool> {
    (1..=n as i64)
        .map(|i| matches!(var.at(&[i]), Some(Value::Bool(true))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edsa::{act, detect, EngineState};
    use crate::grid_model::tests::chain_config;
    use crate::grid_model::BreakerState;
    use crate::lse::build_shedding_matrix;

    fn run(src: &str, inputs: &[(&str, StVar)]) -> Result<StVars, StError> {
        let inputs = inputs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        interpret_source(src, "t", &inputs)
    }

    #[test]
    fn trivial_arithmetic() {
        let src = "FUNCTION_BLOCK t\nVAR_INPUT x : INT; END_VAR\nVAR_OUTPUT y : INT; END_VAR\ny := x + 1;\nEND_FUNCTION_BLOCK\n";
        let out = run(src, &[("x", StVar::Scalar(Value::Int(41)))]).unwrap();
        assert_eq!(out["Y"], StVar::Scalar(Value::Int(42)));
    }

    #[test]
    fn loops_arrays_and_precedence() {
        let src = "
FUNCTION_BLOCK T
VAR_OUTPUT s : DINT; m : ARRAY[1..2, 0..1] OF BOOL; r : LREAL; END_VAR
VAR i : INT; END_VAR
FOR i := 10 TO 1 BY -3 DO s := s + i; END_FOR;  (* 10 + 7 + 4 + 1 *)
m[2, 1] := NOT FALSE AND 1 + 2 * 3 = 7;
IF s > 100 THEN r := 1.0; ELSIF s = 22 THEN r := -2.5 / 2.0; ELSE r := 3.0; END_IF;
s := s MOD 5;
END_FUNCTION_BLOCK";
        let out = run(src, &[]).unwrap();
        assert_eq!(out["S"], StVar::Scalar(Value::Int(2)));
        assert_eq!(out["R"], StVar::Scalar(Value::Real(-1.25)));
        assert_eq!(out["M"].at(&[2, 1]), Some(Value::Bool(true)));
        assert_eq!(out["M"].at(&[1, 1]), Some(Value::Bool(false)));
    }

    #[test]
    fn unsupported_constructs_name_token_and_position() {
        let src = "FUNCTION_BLOCK t\nVAR x : INT; END_VAR\nWHILE x < 3 DO x := x + 1; END_WHILE;\nEND_FUNCTION_BLOCK";
        assert_eq!(
            run(src, &[]).unwrap_err(),
            StError::Unsupported {
                token: "WHILE".into(),
                line: 3,
                col: 1
            }
        );
        let src = "FUNCTION_BLOCK t\nVAR x : INT; END_VAR\n  x := ABS(x);\nEND_FUNCTION_BLOCK";
        assert!(matches!(
            run(src, &[]),
            Err(StError::Unsupported {
                line: 3,
                col: 8,
                ..
            })
        ));
        let src = "PROGRAM p END_PROGRAM";
        assert!(matches!(run(src, &[]), Err(StError::Unsupported { .. })));
    }

    #[test]
    fn typing_is_strict() {
        let src = "FUNCTION_BLOCK t\nVAR x : INT; y : LREAL; END_VAR\ny := x;\nEND_FUNCTION_BLOCK";
        assert!(matches!(run(src, &[]), Err(StError::Type { line: 3, .. })));
        let src = "FUNCTION_BLOCK t\nVAR x : INT; y : LREAL; END_VAR\nIF x < y THEN x := 1; END_IF;\nEND_FUNCTION_BLOCK";
        assert!(matches!(run(src, &[]), Err(StError::Type { .. })));
        let src =
            "FUNCTION_BLOCK t\nVAR x : INT; END_VAR\nx := 32767; x := x + 1;\nEND_FUNCTION_BLOCK";
        assert!(matches!(run(src, &[]), Err(StError::Type { .. })));
        let src =
            "FUNCTION_BLOCK t\nVAR CONSTANT k : INT := 1; END_VAR\nk := 2;\nEND_FUNCTION_BLOCK";
        assert!(matches!(run(src, &[]), Err(StError::Runtime { .. })));
    }

    fn chain_snapshot() -> NetworkSnapshot {
        let c = chain_config();
        let mut s = NetworkSnapshot::all_closed(&c);
        for (i, r) in s.loads.values_mut().enumerate() {
            r.power = 1.0 + (i % 4) as f64;
        }
        for r in s.generators.values_mut() {
            r.power = 12.0;
            r.sr = 1.5;
        }
        s.imported_power = 3.0;
        s
    }

    #[test]
    fn lse_block_matches_native_on_chain() {
        let c = chain_config();
        let p = emit_st(&c, &EmitOptions::default()).unwrap();
        for open_tie in [None, Some("T1"), Some("T2")] {
            let mut s = chain_snapshot();
            if let Some(t) = open_tie {
                s.busties.insert(t.into(), BreakerState::Open);
            }
            let native = build_shedding_matrix(&c, &s, &enumerate_events(&c)).unwrap();
            let out = interpret_st(&p, &p.lse_block, &lse_inputs(&c, &s)).unwrap();
            assert_eq!(sm_rows(&out["SM"], p.n_loads, p.n_events), native.rows());
            let infeasible = bool_list(&out["INFEASIBLE"], p.n_events);
            let expect: Vec<bool> = (0..p.n_events)
                .map(|c| native.infeasible_columns().contains(&c))
                .collect();
            assert_eq!(infeasible, expect);
        }
    }

    #[test]
    fn edsa_block_matches_native_act() {
        let c = chain_config();
        let p = emit_st(&c, &EmitOptions::default()).unwrap();
        let prev = chain_snapshot();
        let catalog = enumerate_events(&c);
        let matrix = build_shedding_matrix(&c, &prev, &catalog).unwrap();
        let mut next = prev.clone();
        next.generators.get_mut(&"G3".into()).unwrap().breaker = BreakerState::Open;
        next.loads.get_mut(&"L02".into()).unwrap().breaker = BreakerState::Open;

        let detected = detect(&c, &catalog, &prev, &next);
        let outcome = act(&EngineState::armed(), &detected[0], &matrix, &next, 3.0);
        let native: Vec<bool> = c
            .loads
            .iter()
            .map(|l| outcome.commands.iter().any(|cmd| cmd.load == l.id))
            .collect();

        let out = interpret_st(
            &p,
            &p.edsa_block,
            &edsa_inputs(&c, &prev, &next, &sm_var(&matrix), true),
        )
        .unwrap();
        assert_eq!(
            out["EVENT"],
            StVar::Scalar(Value::Int(detected[0].index as i64 + 1))
        );
        assert_eq!(bool_list(&out["TRIP"], p.n_loads), native);
        assert!(native.iter().any(|&t| t));

        let off = interpret_st(
            &p,
            &p.edsa_block,
            &edsa_inputs(&c, &prev, &next, &sm_var(&matrix), false),
        )
        .unwrap();
        assert!(bool_list(&off["TRIP"], p.n_loads).iter().all(|&t| !t));
    }

    #[test]
    fn empty_plant_compiles_and_runs() {
        let mut c = chain_config();
        c.loads.clear();
        c.busties.clear();
        c.busbars.truncate(1);
        c.generators.retain(|g| g.busbar.as_str() == "A");
        c.external_tie = None;
        let p = emit_st(&c, &EmitOptions::default()).unwrap();
        assert_eq!(p.n_loads, 0);
        assert!(
            p.source.contains("SM : ARRAY[0..0, 0..3] OF BOOL;"),
            "{}",
            p.source
        );
        let s = NetworkSnapshot::all_closed(&c);
        let out = interpret_st(&p, &p.lse_block, &lse_inputs(&c, &s)).unwrap();
        assert!(sm_rows(&out["SM"], 0, p.n_events).is_empty());
    }

    #[test]
    fn priority_change_is_local_to_its_initializer() {
        let a = chain_config();
        let mut b = a.clone();
        b.loads[4].priority = 9;
        let ta = emit_st(&a, &EmitOptions::default()).unwrap().source;
        let tb = emit_st(&b, &EmitOptions::default()).unwrap().source;
        let diff: Vec<(&str, &str)> = ta.lines().zip(tb.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(ta.lines().count(), tb.lines().count());
        assert_eq!(diff.len(), 1);
        assert!(diff[0].0.trim_start().starts_with("PRIORITY : ARRAY"));
    }

    #[test]
    fn array_bounds_follow_declared_sizes() {
        let c = chain_config();
        let p = emit_st(&c, &EmitOptions::default()).unwrap();
        assert!(p
            .source
            .contains(&format!("N_LOADS : INT := {};", p.n_loads)));
        assert!(p
            .source
            .contains(&format!("LOAD_P : ARRAY[0..{}] OF LREAL;", p.n_loads)));
        assert!(p
            .source
            .contains(&format!("INFEASIBLE : ARRAY[0..{}] OF BOOL;", p.n_events)));
        assert!(p.source.ends_with("END_FUNCTION_BLOCK\n"));
        assert!(!p.source.contains('\r'));
    }
}
