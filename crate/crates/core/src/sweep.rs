//! Nadir surface over (SR parameter, total delay) and SR selection by bisection.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{run_scenario, FlsParams, Plant, SimError, SimScenario, SrSetting};

/// Nadir recorded for a cell whose simulation ended in blackout.
pub const BLACKOUT_NADIR: f64 = 0.0;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{axis} axis: {reason}")]
    Axis { axis: &'static str, reason: String },
    #[error("invalid search: {0}")]
    Search(String),
    #[error(
        "nadir {nadir:.4} Hz at the bottom of the SR range is below the required {required:.4} Hz"
    )]
    Infeasible { nadir: f64, required: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NadirSurface {
    /// MW
    pub sr_axis: Vec<f64>,
    /// s
    pub delay_axis: Vec<f64>,
    /// `nadir[i][j]` for `sr_axis[i]`, `delay_axis[j]`, Hz.
    pub nadir: Vec<Vec<f64>>,
    pub blackout: Vec<Vec<bool>>,
}

impl NadirSurface {
    /// Row at a fixed SR value (nadir against delay).
    pub fn delay_curve(&self, i: usize) -> &[f64] {
        &self.nadir[i]
    }

    /// Column at a fixed delay (nadir against SR).
    pub fn sr_curve(&self, j: usize) -> Vec<f64> {
        self.nadir.iter().map(|row| row[j]).collect()
    }
}

fn check_axis(axis: &'static str, values: &[f64]) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(SweepError::Axis {
            axis,
            reason: "empty".into(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SweepError::Axis {
            axis,
            reason: "non-finite value".into(),
        });
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::Axis {
            axis,
            reason: "values must be strictly increasing".into(),
        });
    }
    Ok(())
}

/// Nadir of `base` with the SR parameter and total delay replaced.
/// Blackout yields [`BLACKOUT_NADIR`] and `true`.
pub fn nadir_at(
    plant: &Plant,
    base: &SimScenario,
    fls: &FlsParams,
    sr: f64,
    delay: f64,
) -> Result<(f64, bool), SimError> {
    let mut s = base.clone();
    s.sr = SrSetting::Constant(sr);
    s.total_delay = delay;
    let trace = run_scenario(plant, &s, fls)?;
    Ok(match trace.blackout {
        Some(_) => (BLACKOUT_NADIR, true),
        None => (trace.nadir(), false),
    })
}

/// One simulation per (SR, delay) cell. Cells run in parallel and are
/// assembled by index, so the result does not depend on scheduling.
pub fn sweep_surface(
    plant: &Plant,
    base: &SimScenario,
    fls: &FlsParams,
    sr_values: &[f64],
    delay_values: &[f64],
) -> Result<NadirSurface, SweepError> {
    check_axis("SR", sr_values)?;
    check_axis("delay", delay_values)?;
    let nd = delay_values.len();
    let cells = (0..sr_values.len() * nd)
        .into_par_iter()
        .map(|c| nadir_at(plant, base, fls, sr_values[c / nd], delay_values[c % nd]))
        .collect::<Result<Vec<_>, _>>()?;
    let (nadir, blackout) = cells
        .chunks(nd)
        .map(|row| row.iter().copied().unzip())
        .unzip();
    Ok(NadirSurface {
        sr_axis: sr_values.to_vec(),
        delay_axis: delay_values.to_vec(),
        nadir,
        blackout,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SrSelection {
    /// Largest SR parameter found to keep the nadir at or above the target, MW.
    pub sr: f64,
    /// Nadir at `sr`, Hz.
    pub nadir: f64,
    /// Simulations run.
    pub simulations: usize,
}

/// Upper bound on the simulations [`max_sr_for_margin`] runs: both range
/// ends plus the bisection steps.
pub fn max_simulations(range: (f64, f64), tolerance: f64) -> usize {
    let steps = ((range.1 - range.0) / tolerance).log2().ceil().max(0.0) as usize;
    steps + 2
}

/// Largest SR in `range` whose nadir stays at or above `threshold + margin`,
/// within `tolerance`. The nadir is assumed non-increasing in SR. The delay is
/// the one in `base`.
pub fn max_sr_for_margin(
    plant: &Plant,
    base: &SimScenario,
    fls: &FlsParams,
    threshold: f64,
    margin: f64,
    range: (f64, f64),
    tolerance: f64,
) -> Result<SrSelection, SweepError> {
    let (lo0, hi0) = range;
    if !(lo0.is_finite() && hi0.is_finite() && lo0 <= hi0) {
        return Err(SweepError::Search(format!("bad SR range {lo0}..{hi0}")));
    }
    if !(tolerance > 0.0) {
        return Err(SweepError::Search("tolerance must be > 0".into()));
    }
    let required = threshold + margin;
    let delay = base.total_delay;
    let mut sims = 0;
    let mut eval = |sr: f64| -> Result<f64, SweepError> {
        sims += 1;
        Ok(nadir_at(plant, base, fls, sr, delay)?.0)
    };

    let n_lo = eval(lo0)?;
    if n_lo < required {
        return Err(SweepError::Infeasible {
            nadir: n_lo,
            required,
        });
    }
    let n_hi = eval(hi0)?;
    if n_hi >= required {
        return Ok(SrSelection {
            sr: hi0,
            nadir: n_hi,
            simulations: sims,
        });
    }
    // invariant: nadir(lo) >= required > nadir(hi)
    let (mut lo, mut hi, mut best) = (lo0, hi0, n_lo);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let n = eval(mid)?;
        if n >= required {
            lo = mid;
            best = n;
        } else {
            hi = mid;
        }
    }
    Ok(SrSelection {
        sr: lo,
        nadir: best,
        simulations: sims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::tests::{plant, trip_scenario};

    fn base() -> SimScenario {
        let mut s = trip_scenario();
        s.duration = 5.0;
        s
    }

    #[test]
    fn degenerate_sweep_matches_direct_run() {
        let (p, b, f) = (plant(), base(), FlsParams::default());
        let s = sweep_surface(&p, &b, &f, &[4.0], &[0.3]).unwrap();
        let mut direct = b.clone();
        direct.sr = SrSetting::Constant(4.0);
        direct.total_delay = 0.3;
        let n = run_scenario(&p, &direct, &f).unwrap().nadir();
        assert_eq!(s.nadir, vec![vec![n]]);
        assert_eq!(s.blackout, vec![vec![false]]);
    }

    #[test]
    fn axes_are_checked() {
        let (p, b, f) = (plant(), base(), FlsParams::default());
        assert!(matches!(
            sweep_surface(&p, &b, &f, &[], &[0.1]),
            Err(SweepError::Axis { axis: "SR", .. })
        ));
        assert!(matches!(
            sweep_surface(&p, &b, &f, &[1.0], &[0.2, 0.2]),
            Err(SweepError::Axis { axis: "delay", .. })
        ));
    }

    #[test]
    fn surface_is_monotone_and_order_independent() {
        let (p, b, f) = (plant(), base(), FlsParams::default());
        let sr = [0.0, 3.0, 6.0, 9.0];
        let delay = [0.1, 0.3, 0.5];
        let s = sweep_surface(&p, &b, &f, &sr, &delay).unwrap();
        let eps = 1e-9;
        for row in &s.nadir {
            assert!(row.windows(2).all(|w| w[1] <= w[0] + eps), "{row:?}");
        }
        for j in 0..delay.len() {
            let col = s.sr_curve(j);
            assert!(col.windows(2).all(|w| w[1] <= w[0] + eps), "{col:?}");
        }
        // evaluating cells one by one in reverse gives the same numbers
        for i in (0..sr.len()).rev() {
            for j in (0..delay.len()).rev() {
                let (n, _) = nadir_at(&p, &b, &f, sr[i], delay[j]).unwrap();
                assert_eq!(n, s.nadir[i][j]);
            }
        }
    }

    #[test]
    fn bisection_agrees_with_dense_scan() {
        let (p, b, f) = (plant(), base(), FlsParams::default());
        let range = (0.0, 12.0);
        let tol = 0.05;
        let required = 49.0;
        let sel = max_sr_for_margin(&p, &b, &f, 48.5, 0.5, range, tol).unwrap();
        assert!(sel.simulations <= max_simulations(range, tol));
        assert!(sel.nadir >= required);

        // largest grid point (0.1 MW) meeting the requirement
        let mut best = None;
        for k in 0..=120 {
            let sr = k as f64 * 0.1;
            if nadir_at(&p, &b, &f, sr, b.total_delay).unwrap().0 >= required {
                best = Some(sr);
            }
        }
        let best = best.unwrap();
        assert!((sel.sr - best).abs() <= 0.1 + tol, "{} vs {best}", sel.sr);
    }

    #[test]
    fn infeasible_start_reports_nadir() {
        let (p, b, f) = (plant(), base(), FlsParams::default());
        match max_sr_for_margin(&p, &b, &f, 49.9, 0.5, (0.0, 5.0), 0.1) {
            Err(SweepError::Infeasible { nadir, required }) => {
                assert!(nadir < required);
                assert_eq!(required, 50.4);
            }
            other => panic!("{other:?}"),
        }
    }
}
