//! Fast load shedding for industrial power systems.
//!
//! - [`grid_model`]: plant topology, snapshots, islands and the event catalog
//! - [`lse`]: power mismatch and shedding-matrix construction
//! - [`edsa`]: event detection and shedding action
//! - [`dynamics`]: closed-loop frequency simulation
//! - [`sweep`]: nadir surfaces and spinning-reserve selection
//! - [`st_codegen`]: IEC 61131-3 Structured Text export and a subset interpreter
//! - [`io`]: configuration, snapshot and scenario files, CSV output
//! - [`cli`]: the `fls` command-line driver
//! - [`reference`]: the reference plant and scenario from `fixtures/`

// NaN must fail range checks, hence the negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod edsa;
pub mod grid_model;
pub mod io;
pub mod lse;
pub mod reference;
pub mod st_codegen;
pub mod sweep;
