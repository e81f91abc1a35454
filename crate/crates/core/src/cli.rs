//! Command-line driver. `run` is the whole program; the binary only forwards
//! arguments and the exit code.
//!
//! Exit codes: 0 success, 1 the result is infeasible or the relay tripped,
//! 2 bad input or usage.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};

use crate::dynamics::run_scenario;
use crate::grid_model::enumerate_events;
use crate::io::{self, csv, IoError, LoadedConfig};
use crate::lse::build_shedding_matrix;
use crate::st_codegen::{emit_st, EmitOptions};
use crate::sweep::{max_sr_for_margin, sweep_surface, SweepError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RESULT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fls", version, about = "Fast load shedding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a plant configuration.
    Validate { config: PathBuf },
    /// Shedding matrix for one snapshot, as CSV.
    Sm {
        config: PathBuf,
        snapshot: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Closed-loop simulation; trace as CSV.
    Simulate {
        config: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        no_shedding: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Nadir surface over SR parameter and delay, as long-form CSV.
    Sweep {
        config: PathBuf,
        scenario: PathBuf,
        /// MW, start:stop:step (inclusive)
        #[arg(long)]
        sr: Steps,
        /// s, start:stop:step (inclusive)
        #[arg(long)]
        delay: Steps,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Largest SR parameter keeping the nadir above threshold + margin.
    SelectSr {
        config: PathBuf,
        scenario: PathBuf,
        /// Hz; defaults to the configured relay threshold
        #[arg(long)]
        threshold: Option<f64>,
        /// Hz
        #[arg(long)]
        margin: f64,
        /// MW, min:max
        #[arg(long, default_value = "0:20")]
        range: Span,
        /// MW
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Structured Text export of the selection and detection blocks.
    Codegen {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// `start:stop:step`, both ends included.
#[derive(Debug, Clone, PartialEq)]
pub struct Steps(pub Vec<f64>);

impl FromStr for Steps {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got '{s}'"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{t}' is not a number"))
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) {
            return Err("step must be > 0".into());
        }
        if b < a {
            return Err(format!("stop {b} is below start {a}"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err("too many points".into());
        }
        // rounded to 1e-9 so 0.1 steps print as 0.3, not 0.30000000000000004
        Ok(Steps(
            (0..=n)
                .map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9)
                .collect(),
        ))
    }
}

/// `min:max`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected min:max, got '{s}'"))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
        };
        let (a, b) = (num(a)?, num(b)?);
        if !(a <= b) {
            return Err(format!("empty range {a}:{b}"));
        }
        Ok(Span(a, b))
    }
}

enum Failure {
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn sink<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            IoError::Read {
                path: p.clone(),
                source: e,
            }
        })?)),
        None => Box::new(stdout),
    })
}

fn config(path: &Path) -> Result<LoadedConfig, Failure> {
    Ok(io::load_config(path)?)
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { config: path } => {
            let c = config(&path)?;
            writeln!(
                stderr,
                "valid: {} busbars, {} busties, {} generators, {} loads, {} events",
                c.grid.busbars.len(),
                c.grid.busties.len(),
                c.grid.generators.len(),
                c.grid.loads.len(),
                enumerate_events(&c.grid).len()
            )?;
            Ok(EXIT_OK)
        }
        Command::Sm {
            config: cfg,
            snapshot,
            output,
        } => {
            let c = config(&cfg)?;
            let snap = io::load_snapshot(&snapshot, &c.grid)?;
            let m = build_shedding_matrix(&c.grid, &snap, &enumerate_events(&c.grid))?;
            csv::write_matrix(&m, sink(&output, stdout)?)?;
            for w in m.warnings() {
                writeln!(stderr, "warning: {w}")?;
            }
            let infeasible = m.infeasible_columns().len();
            writeln!(
                stderr,
                "matrix: {} loads x {} events, {infeasible} infeasible column(s)",
                m.n_rows(),
                m.n_cols()
            )?;
            Ok(if infeasible > 0 { EXIT_RESULT } else { EXIT_OK })
        }
        Command::Simulate {
            config: cfg,
            scenario,
            no_shedding,
            output,
        } => {
            let c = config(&cfg)?;
            let s = io::load_scenario(&scenario, &c)?;
            let trace = run_scenario(&c.plant(), &s, &c.fls_params(!no_shedding))?;
            csv::write_trace(&trace, sink(&output, stdout)?)?;
            let fmt_t = |t: Option<f64>| t.map_or("none".to_owned(), |t| format!("{t:.3} s"));
            writeln!(
                stderr,
                "nadir {:.4} Hz, {} trip command(s), relay trip: {}, blackout: {}",
                trace.nadir(),
                trace.commands.len(),
                fmt_t(trace.relay_trip),
                fmt_t(trace.blackout)
            )?;
            let bad = trace.relay_trip.is_some() || trace.blackout.is_some();
            Ok(if bad { EXIT_RESULT } else { EXIT_OK })
        }
        Command::Sweep {
            config: cfg,
            scenario,
            sr,
            delay,
            output,
        } => {
            let c = config(&cfg)?;
            let s = io::load_scenario(&scenario, &c)?;
            let surface = sweep_surface(&c.plant(), &s, &c.fls_params(true), &sr.0, &delay.0)?;
            csv::write_surface(&surface, sink(&output, stdout)?)?;
            let blackouts = surface.blackout.iter().flatten().filter(|&&b| b).count();
            writeln!(
                stderr,
                "surface: {} x {} cells, {blackouts} blackout(s)",
                sr.0.len(),
                delay.0.len()
            )?;
            Ok(EXIT_OK)
        }
        Command::SelectSr {
            config: cfg,
            scenario,
            threshold,
            margin,
            range,
            tolerance,
        } => {
            let c = config(&cfg)?;
            let s = io::load_scenario(&scenario, &c)?;
            let threshold = threshold.unwrap_or(s.uf_threshold);
            match max_sr_for_margin(
                &c.plant(),
                &s,
                &c.fls_params(true),
                threshold,
                margin,
                (range.0, range.1),
                tolerance,
            ) {
                Ok(sel) => {
                    writeln!(stdout, "{}", sel.sr)?;
                    writeln!(
                        stderr,
                        "sr {} MW, nadir {:.4} Hz, {} simulation(s)",
                        sel.sr, sel.nadir, sel.simulations
                    )?;
                    Ok(EXIT_OK)
                }
                Err(e @ SweepError::Infeasible { .. }) => {
                    writeln!(stderr, "infeasible: {e}")?;
                    Ok(EXIT_RESULT)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Codegen {
            config: cfg,
            output,
        } => {
            let c = config(&cfg)?;
            let p = emit_st(&c.grid, &EmitOptions::default())?;
            let mut out = sink(&output, stdout)?;
            out.write_all(p.source.as_bytes())?;
            out.flush()?;
            writeln!(
                stderr,
                "emitted {} and {} ({} loads, {} events)",
                p.lse_block, p.edsa_block, p.n_loads, p.n_events
            )?;
            Ok(EXIT_OK)
        }
    }
}
