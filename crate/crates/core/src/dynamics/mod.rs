//! Closed-loop frequency simulation of an islanded plant.
//!
//! The plant is reduced to one aggregate frequency governed by the swing
//! equation
//!
//! ```text
//! df/dt = f0 / (2 · Σ H_i · S_n,i) · (P_g − P_l)
//! ```
//!
//! summed over connected generators. Each generator carries a droop
//! turbine-governor ([`governor`]). Loads are constant-power blocks with no
//! frequency dependence and no inertia. The load-selection engine runs at its
//! refresh period, the fast loop every step, and trip commands take effect
//! `total_delay` after the event sample.

pub mod governor;
pub mod rk4;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edsa::{DetectedEvent, FastLoop, TripCommand, DEFAULT_SETTLE_TIME};
use crate::grid_model::{
    enumerate_events, partition, BreakerState, BustieId, Event, EventCatalog, GeneratorId,
    GeneratorReading, GridConfig, LoadId, LoadReading, NetworkSnapshot,
};
use crate::lse::{build_shedding_matrix, LseError, LsePeriod};

pub use governor::{governor_step, DroopBase, GovernorParams, GovernorState};
pub use rk4::Rk4;

/// Default integration step, seconds.
pub const DEFAULT_DT: f64 = 1e-3;

/// Step boundaries are matched with this slack so that times that are exact
/// multiples of `dt` in decimal do not slip a step through rounding.
const STEP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario: {0}")]
    InvalidScenario(String),
    #[error("generator '{0}' has no governor parameters")]
    MissingGovernor(GeneratorId),
    #[error("generator '{generator}': {reason}")]
    InvalidGovernor {
        generator: GeneratorId,
        reason: String,
    },
    #[error("initial operating point is unbalanced: generation {generation} MW, load {load} MW")]
    Unbalanced { generation: f64, load: f64 },
    #[error("{0} events need a multi-island model; only generator, building and grid losses can be scripted")]
    UnsupportedEvent(String),
    #[error(transparent)]
    Lse(#[from] LseError),
}

/// Static plant plus the dynamic data of each generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub config: GridConfig,
    pub governors: BTreeMap<GeneratorId, GovernorParams>,
}

/// Spinning reserve handed to the load-selection engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrSetting {
    /// Each generator's configured curve at its measured output.
    Curve,
    /// The same reserve, MW, for every connected generator.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedEvent {
    /// s
    pub time: f64,
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    /// Online generators and their initial output, MW.
    pub dispatch: BTreeMap<GeneratorId, f64>,
    /// Connected loads and their power, MW.
    pub loads: BTreeMap<LoadId, f64>,
    pub open_busties: Vec<BustieId>,
    pub tie_closed: bool,
    /// MW
    pub imported_power: f64,
    pub events: Vec<ScriptedEvent>,
    /// Event instant to load-breaker opening, s.
    pub total_delay: f64,
    pub sr: SrSetting,
    /// Hz
    pub uf_threshold: f64,
    /// Time below threshold before the relay trips, s.
    pub relay_pickup_delay: f64,
    /// s
    pub duration: f64,
    /// s
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlsParams {
    /// Fast loop connected; when false the load-selection engine still runs
    /// but no trip command is ever issued.
    pub shedding_enabled: bool,
    pub lse_period: LsePeriod,
    pub settle_time: f64,
}

impl Default for FlsParams {
    fn default() -> Self {
        Self {
            shedding_enabled: true,
            lse_period: LsePeriod::default(),
            settle_time: DEFAULT_SETTLE_TIME,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakerChange {
    /// s
    pub time: f64,
    pub element: String,
    pub state: BreakerState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub nominal_frequency: f64,
    /// s, uniform: `time[k] = k · dt`
    pub time: Vec<f64>,
    /// Hz
    pub frequency: Vec<f64>,
    pub generator_ids: Vec<GeneratorId>,
    /// Mechanical power per generator (outer index = generator), MW; zero once disconnected.
    pub generator_power: Vec<Vec<f64>>,
    /// Connected load, MW.
    pub total_load: Vec<f64>,
    pub breaker_log: Vec<BreakerChange>,
    pub commands: Vec<TripCommand>,
    /// Events observed while the fast loop was inhibited.
    pub backup_events: Vec<DetectedEvent>,
    /// Time the underfrequency relay tripped.
    pub relay_trip: Option<f64>,
    /// Time the last generator was lost; the trace ends there.
    pub blackout: Option<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn nadir(&self) -> f64 {
        nadir(self)
    }

    /// Total generation (sum of mechanical powers) at sample `k`.
    pub fn generation(&self, k: usize) -> f64 {
        self.generator_power.iter().map(|p| p[k]).sum()
    }

    /// Largest frequency change between consecutive samples.
    pub fn max_step_change(&self) -> f64 {
        self.frequency
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimum frequency sample of the trace.
pub fn nadir(trace: &SimTrace) -> f64 {
    trace
        .frequency
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `2 · Σ H_i · S_n,i` over the connected generators (indexed like `config.generators`).
pub fn inertia_sum(config: &GridConfig, connected: &[bool]) -> f64 {
    config
        .generators
        .iter()
        .zip(connected)
        .filter(|(_, &on)| on)
        .map(|(g, _)| 2.0 * g.inertia_constant * g.rated_apparent_power)
        .sum()
}

/// Rate of change of frequency, Hz/s. `None` when no generator is connected.
pub fn swing_rocof(
    config: &GridConfig,
    connected: &[bool],
    p_gen: f64,
    p_load: f64,
) -> Option<f64> {
    let two_hs = inertia_sum(config, connected);
    (two_hs > 0.0).then(|| config.nominal_frequency * (p_gen - p_load) / two_hs)
}

fn steps_for(seconds: f64, dt: f64) -> usize {
    (seconds / dt - STEP_EPS).ceil().max(0.0) as usize
}

struct Sim<'a> {
    plant: &'a Plant,
    scenario: &'a SimScenario,
    catalog: EventCatalog,
    gov: Vec<GovernorParams>,
    base: Vec<DroopBase>,
    setpoint: Vec<f64>,
    gen_on: Vec<bool>,
    load_power: Vec<f64>,
    load_on: Vec<bool>,
    bustie_closed: Vec<bool>,
    tie_on: bool,
    /// [f, valve_0, mech_0, valve_1, mech_1, ...]
    y: Vec<f64>,
}

impl<'a> Sim<'a> {
    fn new(plant: &'a Plant, scenario: &'a SimScenario) -> Result<Self, SimError> {
        let config = &plant.config;
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        if !(scenario.dt > 0.0) {
            return bad(format!("step must be > 0, got {}", scenario.dt));
        }
        if !(scenario.duration >= 0.0) {
            return bad(format!("duration must be >= 0, got {}", scenario.duration));
        }
        if !(scenario.total_delay >= 0.0) {
            return bad(format!(
                "total delay must be >= 0, got {}",
                scenario.total_delay
            ));
        }
        if !(scenario.relay_pickup_delay >= 0.0) {
            return bad("relay pickup delay must be >= 0".into());
        }
        if let SrSetting::Constant(v) = scenario.sr {
            if !(v >= 0.0) {
                return bad(format!("spinning reserve must be >= 0 MW, got {v}"));
            }
        }
        for id in scenario.dispatch.keys() {
            if config.generator(id).is_none() {
                return bad(format!("unknown generator '{id}' in dispatch"));
            }
        }
        for id in scenario.loads.keys() {
            if config.load_index(id).is_none() {
                return bad(format!("unknown load '{id}'"));
            }
        }
        for id in &scenario.open_busties {
            if config.bustie_index(id).is_none() {
                return bad(format!("unknown bustie '{id}'"));
            }
        }
        if scenario.tie_closed && config.active_tie().is_none() {
            return bad("tie closed but the plant has no external tie".into());
        }

        let catalog = enumerate_events(config);
        for ev in &scenario.events {
            if !(0.0..=scenario.duration).contains(&ev.time) {
                return bad(format!(
                    "event {} at {} s lies outside [0, {}] s",
                    ev.event, ev.time, scenario.duration
                ));
            }
            if catalog.index_of(&ev.event).is_none() {
                return bad(format!("event {} is not in the plant's catalog", ev.event));
            }
            if matches!(ev.event, Event::BustieOpen(_)) {
                return Err(SimError::UnsupportedEvent(ev.event.label()));
            }
        }

        let mut gov = Vec::new();
        let mut base = Vec::new();
        let mut setpoint = Vec::new();
        let mut gen_on = Vec::new();
        for g in &config.generators {
            let p = *plant
                .governors
                .get(&g.id)
                .ok_or_else(|| SimError::MissingGovernor(g.id.clone()))?;
            p.check().map_err(|reason| SimError::InvalidGovernor {
                generator: g.id.clone(),
                reason,
            })?;
            let dispatch = scenario.dispatch.get(&g.id).copied();
            if let Some(d) = dispatch {
                if !(p.p_min..=p.p_max).contains(&d) {
                    return bad(format!(
                        "dispatch of '{}' ({d} MW) outside [{}, {}] MW",
                        g.id, p.p_min, p.p_max
                    ));
                }
            }
            gov.push(p);
            base.push(DroopBase {
                rated_power: g.rated_power,
                nominal_frequency: config.nominal_frequency,
            });
            setpoint.push(dispatch.unwrap_or(0.0));
            gen_on.push(dispatch.is_some());
        }

        let mut y = vec![config.nominal_frequency];
        for &sp in &setpoint {
            y.push(sp);
            y.push(sp);
        }

        let sim = Sim {
            plant,
            scenario,
            catalog,
            gov,
            base,
            setpoint,
            gen_on,
            load_power: config
                .loads
                .iter()
                .map(|l| scenario.loads.get(&l.id).copied().unwrap_or(0.0))
                .collect(),
            load_on: config
                .loads
                .iter()
                .map(|l| scenario.loads.contains_key(&l.id))
                .collect(),
            bustie_closed: config
                .busties
                .iter()
                .map(|t| !scenario.open_busties.contains(&t.id))
                .collect(),
            tie_on: scenario.tie_closed,
            y,
        };

        let snap = sim.snapshot(0.0);
        let islands = partition(config, &snap).map_err(LseError::from)?;
        let energized = islands
            .iter()
            .filter(|isl| {
                isl.generators.iter().any(|g| snap.generator_closed(g))
                    || isl.loads.iter().any(|l| snap.load_closed(l))
            })
            .count();
        if energized > 1 {
            return bad(format!(
                "{energized} energized islands; the single-frequency model needs one"
            ));
        }
        let generation = sim.generation(&sim.y);
        let load = sim.load();
        if (generation - load).abs() > 1e-6 {
            return Err(SimError::Unbalanced { generation, load });
        }
        Ok(sim)
    }

    fn import(&self) -> f64 {
        if self.tie_on {
            self.scenario.imported_power
        } else {
            0.0
        }
    }

    fn generation(&self, y: &[f64]) -> f64 {
        let mut p = 0.0;
        for (i, &on) in self.gen_on.iter().enumerate() {
            if on {
                p += y[2 + 2 * i];
            }
        }
        p + self.import()
    }

    fn load(&self) -> f64 {
        let mut p = 0.0;
        for (i, &on) in self.load_on.iter().enumerate() {
            if on {
                p += self.load_power[i];
            }
        }
        p
    }

    fn snapshot(&self, t: f64) -> NetworkSnapshot {
        let config = &self.plant.config;
        let generators = config
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let on = self.gen_on[i];
                let power = if on { self.y[2 + 2 * i] } else { 0.0 };
                let sr = match (on, self.scenario.sr) {
                    (false, _) => 0.0,
                    (true, SrSetting::Curve) => g.sr_curve.evaluate(power),
                    (true, SrSetting::Constant(v)) => v,
                };
                (
                    g.id.clone(),
                    GeneratorReading {
                        breaker: BreakerState::from_closed(on),
                        power,
                        sr,
                    },
                )
            })
            .collect();
        let loads = config
            .loads
            .iter()
            .enumerate()
            .map(|(i, l)| {
                (
                    l.id.clone(),
                    LoadReading {
                        breaker: BreakerState::from_closed(self.load_on[i]),
                        power: if self.load_on[i] {
                            self.load_power[i]
                        } else {
                            0.0
                        },
                        priority: None,
                    },
                )
            })
            .collect();
        NetworkSnapshot {
            timestamp: t,
            generators,
            loads,
            busties: config
                .busties
                .iter()
                .zip(&self.bustie_closed)
                .map(|(b, &c)| (b.id.clone(), BreakerState::from_closed(c)))
                .collect(),
            external_tie: config
                .active_tie()
                .map(|_| BreakerState::from_closed(self.tie_on)),
            imported_power: self.import(),
        }
    }

    fn apply(&mut self, event: &Event, t: f64, log: &mut Vec<BreakerChange>) {
        let config = &self.plant.config;
        let mut open_gen = |i: usize, on: &mut Vec<bool>| {
            if on[i] {
                on[i] = false;
                log.push(BreakerChange {
                    time: t,
                    element: config.generators[i].id.to_string(),
                    state: BreakerState::Open,
                });
            }
        };
        match event {
            Event::GeneratorTrip(id) => {
                if let Some(i) = config.generator_index(id) {
                    open_gen(i, &mut self.gen_on);
                }
            }
            Event::BuildingLoss(b) => {
                for (i, g) in config.generators.iter().enumerate() {
                    if &g.building == b {
                        open_gen(i, &mut self.gen_on);
                    }
                }
            }
            Event::GridBlackout(id) => {
                if self.tie_on {
                    self.tie_on = false;
                    log.push(BreakerChange {
                        time: t,
                        element: id.to_string(),
                        state: BreakerState::Open,
                    });
                }
            }
            Event::BustieOpen(_) => unreachable!("rejected at scenario validation"),
        }
    }

    fn derivatives(&self, y: &[f64], two_hs: f64, p_load: f64, import: f64, d: &mut [f64]) {
        let f0 = self.plant.config.nominal_frequency;
        let delta_f = y[0] - f0;
        let mut p_gen = 0.0;
        for i in 0..self.gen_on.len() {
            let (v, m) = (y[1 + 2 * i], y[2 + 2 * i]);
            if self.gen_on[i] {
                p_gen += m;
                let (dv, dm) = governor::derivatives(
                    &self.gov[i],
                    self.base[i],
                    self.setpoint[i],
                    v,
                    m,
                    delta_f,
                );
                d[1 + 2 * i] = dv;
                d[2 + 2 * i] = dm;
            } else {
                d[1 + 2 * i] = 0.0;
                d[2 + 2 * i] = 0.0;
            }
        }
        d[0] = f0 * (p_gen + import - p_load) / two_hs;
    }
}

/// Runs one closed-loop simulation.
///
/// Per step, in order: the load-selection engine refreshes on the pre-event
/// state (every LSE period), scripted events open their breakers, the fast
/// loop compares snapshots and schedules trip commands, due trips open their
/// loads, the relay is checked, the sample is recorded, and the state is
/// integrated with RK4. Losing every generator ends the trace with the
/// blackout flag.
pub fn run_scenario(
    plant: &Plant,
    scenario: &SimScenario,
    fls: &FlsParams,
) -> Result<SimTrace, SimError> {
    let mut sim = Sim::new(plant, scenario)?;
    let config = &plant.config;
    let dt = scenario.dt;
    let n_steps = steps_for(scenario.duration, dt);
    let delay_steps = steps_for(scenario.total_delay, dt);
    let lse_steps = steps_for(fls.lse_period.seconds(), dt).max(1);

    let mut pending: Vec<(usize, &ScriptedEvent)> = scenario
        .events
        .iter()
        .map(|e| (steps_for(e.time, dt), e))
        .collect();
    pending.sort_by_key(|a| a.0);
    let mut pending = pending.into_iter().peekable();

    let mut fast = FastLoop::new(fls.settle_time);
    let mut sheds: Vec<(usize, usize)> = Vec::new(); // (step, load index)
    let mut trace = SimTrace {
        dt,
        nominal_frequency: config.nominal_frequency,
        time: Vec::with_capacity(n_steps + 1),
        frequency: Vec::with_capacity(n_steps + 1),
        generator_ids: config.generators.iter().map(|g| g.id.clone()).collect(),
        generator_power: vec![Vec::with_capacity(n_steps + 1); config.generators.len()],
        total_load: Vec::with_capacity(n_steps + 1),
        breaker_log: Vec::new(),
        commands: Vec::new(),
        backup_events: Vec::new(),
        relay_trip: None,
        blackout: None,
    };
    let mut below_since: Option<f64> = None;
    let mut rk = Rk4::new(sim.y.len());
    let mut prev = sim.snapshot(0.0);

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        if k % lse_steps == 0 {
            let m = build_shedding_matrix(config, &sim.snapshot(t), &sim.catalog)?;
            fast.install_matrix(Arc::new(m));
        }

        while let Some((_, ev)) = pending.next_if(|(s, _)| *s <= k) {
            sim.apply(&ev.event, t, &mut trace.breaker_log);
        }

        let snap = sim.snapshot(t);
        if fls.shedding_enabled {
            for cmd in fast.step(config, &sim.catalog, &prev, &snap) {
                if let Some(l) = config.load_index(&cmd.load) {
                    sheds.push((k + delay_steps, l));
                }
                trace.commands.push(cmd);
            }
            if fast.tick(t) {
                let m = build_shedding_matrix(config, &snap, &sim.catalog)?;
                fast.install_matrix(Arc::new(m));
            }
        }

        for &(_, l) in sheds.iter().filter(|(s, _)| *s == k) {
            if sim.load_on[l] {
                sim.load_on[l] = false;
                trace.breaker_log.push(BreakerChange {
                    time: t,
                    element: config.loads[l].id.to_string(),
                    state: BreakerState::Open,
                });
            }
        }

        let f = sim.y[0];
        if f < scenario.uf_threshold {
            let since = *below_since.get_or_insert(t);
            if trace.relay_trip.is_none() && t - since >= scenario.relay_pickup_delay - STEP_EPS {
                trace.relay_trip = Some(t);
            }
        } else {
            below_since = None;
        }

        trace.time.push(t);
        trace.frequency.push(f);
        for (i, series) in trace.generator_power.iter_mut().enumerate() {
            series.push(if sim.gen_on[i] { sim.y[2 + 2 * i] } else { 0.0 });
        }
        trace.total_load.push(sim.load());

        let two_hs = inertia_sum(config, &sim.gen_on);
        if two_hs <= 0.0 {
            trace.blackout = Some(t);
            break;
        }
        if k == n_steps {
            break;
        }
        let p_load = sim.load();
        let import = sim.import();
        let mut y = std::mem::take(&mut sim.y);
        rk.step(t, &mut y, dt, |_, y, d| {
            sim.derivatives(y, two_hs, p_load, import, d)
        });
        sim.y = y;
        prev = sim.snapshot(t);
    }

    trace.backup_events = fast.backup_log().to_vec();
    Ok(trace)
}
