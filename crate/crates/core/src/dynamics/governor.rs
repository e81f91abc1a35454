//! Turbine-governor: droop feedback scaled to rated power, a governor lag and
//! a turbine lag, with the power demand clamped to the unit's limits.
//!
//! ```text
//! demand = clamp(setpoint − Δf / (R·f0) · P_rated, P_min, P_max)
//! d(valve)/dt = (demand − valve) / T_gov
//! d(mech)/dt  = (valve − mech)   / T_turb
//! ```
//!
//! Starting inside `[P_min, P_max]`, valve and mechanical power stay inside it.

use serde::{Deserialize, Serialize};

use super::rk4::Rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GovernorParams {
    /// Permanent droop R, per unit.
    pub droop: f64,
    /// s
    pub t_gov: f64,
    /// s
    pub t_turb: f64,
    /// MW
    pub p_max: f64,
    /// MW
    pub p_min: f64,
}

impl GovernorParams {
    pub fn check(&self) -> Result<(), String> {
        if !(self.droop > 0.0) {
            return Err(format!("droop must be > 0, got {}", self.droop));
        }
        if !(self.t_gov > 0.0 && self.t_turb > 0.0) {
            return Err("governor and turbine time constants must be > 0".into());
        }
        if !(self.p_min <= self.p_max) {
            return Err(format!(
                "p_min ({}) must not exceed p_max ({})",
                self.p_min, self.p_max
            ));
        }
        Ok(())
    }
}

/// Scaling of the droop loop: the unit's rated power and the nominal frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroopBase {
    pub rated_power: f64,
    pub nominal_frequency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorState {
    /// Load reference, MW.
    pub setpoint: f64,
    pub valve: f64,
    /// Mechanical power, MW.
    pub mech: f64,
}

impl GovernorState {
    pub fn at_setpoint(setpoint: f64) -> Self {
        Self {
            setpoint,
            valve: setpoint,
            mech: setpoint,
        }
    }
}

pub(crate) fn demand(p: &GovernorParams, base: DroopBase, setpoint: f64, delta_f: f64) -> f64 {
    let droop_term = delta_f / (p.droop * base.nominal_frequency) * base.rated_power;
    (setpoint - droop_term).clamp(p.p_min, p.p_max)
}

/// Derivatives of (valve, mech).
pub(crate) fn derivatives(
    p: &GovernorParams,
    base: DroopBase,
    setpoint: f64,
    valve: f64,
    mech: f64,
    delta_f: f64,
) -> (f64, f64) {
    let u = demand(p, base, setpoint, delta_f);
    ((u - valve) / p.t_gov, (valve - mech) / p.t_turb)
}

/// Advances one governor by `dt` with the frequency deviation held constant.
pub fn governor_step(
    params: &GovernorParams,
    base: DroopBase,
    state: GovernorState,
    delta_f: f64,
    dt: f64,
) -> GovernorState {
    let mut y = [state.valve, state.mech];
    Rk4::new(2).step(0.0, &mut y, dt, |_, y, d| {
        let (dv, dm) = derivatives(params, base, state.setpoint, y[0], y[1], delta_f);
        d[0] = dv;
        d[1] = dm;
    });
    GovernorState {
        setpoint: state.setpoint,
        valve: y[0],
        mech: y[1],
    }
}
