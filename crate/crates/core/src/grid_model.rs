//! Plant topology, live network snapshots, connectivity partitioning and the
//! catalog of foreseen events.
//!
//! A [`GridConfig`] is the static description of the plant; a
//! [`NetworkSnapshot`] is one acquisition of breaker statuses and power
//! measurements. Everything downstream (load selection, event detection,
//! simulation, code generation) consumes these two values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of busbars the shedding logic supports.
pub const MAX_BUSBARS: usize = 3;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Busbar identifier.
    BusbarId
);
id_type!(
    /// Bustie (bus-coupler breaker) identifier.
    BustieId
);
id_type!(
    /// Generator identifier.
    GeneratorId
);
id_type!(
    /// Load identifier.
    LoadId
);
id_type!(
    /// Building identifier; generators sharing one are lost together on a fire & gas event.
    BuildingId
);
id_type!(
    /// External grid connection identifier.
    TieId
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Busbar {
    pub id: BusbarId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bustie {
    pub id: BustieId,
    pub endpoints: (BusbarId, BusbarId),
}

/// Spinning-reserve curve: breakpoints of (generator output MW, reserve MW).
///
/// Evaluation is a left-continuous step: the reserve at power `p` is the value
/// of the last breakpoint whose power is `<= p`. Below the first breakpoint
/// (and for an empty curve) the reserve is zero. A zero-valued breakpoint
/// therefore declares a zero band reaching up to the next breakpoint, which is
/// how the DLE combustion-change range is expressed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SrCurve(pub Vec<(f64, f64)>);

impl SrCurve {
    pub fn constant(sr: f64) -> Self {
        Self(vec![(0.0, sr)])
    }

    pub fn evaluate(&self, power: f64) -> f64 {
        self.0
            .iter()
            .take_while(|(p, _)| *p <= power)
            .last()
            .map_or(0.0, |&(_, sr)| sr)
    }

    /// Power intervals `[start, end)` over which the curve is exactly zero
    /// between two breakpoints. An open-ended trailing zero has `end = inf`.
    pub fn zero_bands(&self) -> Vec<(f64, f64)> {
        let pts = &self.0;
        pts.iter()
            .enumerate()
            .filter(|(_, (_, sr))| *sr == 0.0)
            .map(|(i, &(p, _))| (p, pts.get(i + 1).map_or(f64::INFINITY, |n| n.0)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GeneratorId,
    pub busbar: BusbarId,
    pub building: BuildingId,
    /// MW
    pub rated_power: f64,
    /// MVA
    pub rated_apparent_power: f64,
    /// H, seconds
    pub inertia_constant: f64,
    pub sr_curve: SrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: LoadId,
    pub busbar: BusbarId,
    /// Lower values are shed first.
    pub priority: u32,
    pub sheddable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalTie {
    pub id: TieId,
    pub busbar: BusbarId,
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub busbars: Vec<Busbar>,
    pub busties: Vec<Bustie>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub external_tie: Option<ExternalTie>,
    /// f0, Hz
    pub nominal_frequency: f64,
}

impl GridConfig {
    pub fn busbar_index(&self, id: &BusbarId) -> Option<usize> {
        self.busbars.iter().position(|b| &b.id == id)
    }

    pub fn generator(&self, id: &GeneratorId) -> Option<&Generator> {
        self.generators.iter().find(|g| &g.id == id)
    }

    pub fn generator_index(&self, id: &GeneratorId) -> Option<usize> {
        self.generators.iter().position(|g| &g.id == id)
    }

    pub fn load_index(&self, id: &LoadId) -> Option<usize> {
        self.loads.iter().position(|l| &l.id == id)
    }

    pub fn bustie_index(&self, id: &BustieId) -> Option<usize> {
        self.busties.iter().position(|t| &t.id == id)
    }

    /// The external tie, if one is configured and present.
    pub fn active_tie(&self) -> Option<&ExternalTie> {
        self.external_tie.as_ref().filter(|t| t.present)
    }

    /// Distinct building identifiers in ascending order.
    pub fn buildings(&self) -> Vec<BuildingId> {
        self.generators
            .iter()
            .map(|g| g.building.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    BusbarCount {
        count: usize,
    },
    NonPositiveFrequency {
        value: f64,
    },
    DuplicateId {
        kind: &'static str,
        id: String,
    },
    DanglingBusbar {
        element: String,
        busbar: BusbarId,
    },
    BustieSelfLoop {
        bustie: BustieId,
    },
    DuplicateBustiePair {
        bustie: BustieId,
        other: BustieId,
    },
    DisconnectedTopology {
        components: usize,
    },
    NonPositiveRatedPower {
        generator: GeneratorId,
        value: f64,
    },
    ApparentBelowRated {
        generator: GeneratorId,
    },
    NonPositiveInertia {
        generator: GeneratorId,
        value: f64,
    },
    NegativeReserve {
        generator: GeneratorId,
        power: f64,
        value: f64,
    },
    UnorderedSrCurve {
        generator: GeneratorId,
    },
    ZeroPriority {
        load: LoadId,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::BusbarCount { count } => write!(
                f,
                "busbars: {count} declared, the shedding logic supports 1 to {MAX_BUSBARS}"
            ),
            Finding::NonPositiveFrequency { value } => {
                write!(f, "nominal_frequency: must be > 0 Hz, got {value}")
            }
            Finding::DuplicateId { kind, id } => write!(f, "{kind} '{id}': duplicate id"),
            Finding::DanglingBusbar { element, busbar } => {
                write!(f, "{element}: references unknown busbar '{busbar}'")
            }
            Finding::BustieSelfLoop { bustie } => {
                write!(f, "bustie '{bustie}': endpoints must be distinct busbars")
            }
            Finding::DuplicateBustiePair { bustie, other } => {
                write!(
                    f,
                    "bustie '{bustie}': couples the same busbars as '{other}'"
                )
            }
            Finding::DisconnectedTopology { components } => write!(
                f,
                "busties: with every bustie closed the grid still splits into {components} parts"
            ),
            Finding::NonPositiveRatedPower { generator, value } => {
                write!(
                    f,
                    "generator '{generator}': rated_power must be > 0 MW, got {value}"
                )
            }
            Finding::ApparentBelowRated { generator } => write!(
                f,
                "generator '{generator}': rated_apparent_power must be >= rated_power"
            ),
            Finding::NonPositiveInertia { generator, value } => write!(
                f,
                "generator '{generator}': inertia_constant must be > 0 s, got {value}"
            ),
            Finding::NegativeReserve {
                generator,
                power,
                value,
            } => write!(
                f,
                "generator '{generator}': sr_curve value {value} MW at {power} MW is negative"
            ),
            Finding::UnorderedSrCurve { generator } => write!(
                f,
                "generator '{generator}': sr_curve breakpoints must have strictly increasing power"
            ),
            Finding::ZeroPriority { load } => {
                write!(f, "load '{load}': priority must be a positive integer")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

fn duplicates<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Vec<Finding> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Finding::DuplicateId {
                kind,
                id: id.to_owned(),
            });
        }
    }
    out
}

/// Checks every structural invariant of a [`GridConfig`]. Findings are
/// reported in a fixed order: global checks, duplicate ids, references,
/// busties, generators, loads.
pub fn validate_config(config: &GridConfig) -> ValidationReport {
    let mut findings = Vec::new();

    let n = config.busbars.len();
    if n == 0 || n > MAX_BUSBARS {
        findings.push(Finding::BusbarCount { count: n });
    }
    if !(config.nominal_frequency > 0.0) {
        findings.push(Finding::NonPositiveFrequency {
            value: config.nominal_frequency,
        });
    }

    findings.extend(duplicates(
        "busbar",
        config.busbars.iter().map(|b| b.id.as_str()),
    ));
    findings.extend(duplicates(
        "bustie",
        config.busties.iter().map(|t| t.id.as_str()),
    ));
    findings.extend(duplicates(
        "generator",
        config.generators.iter().map(|g| g.id.as_str()),
    ));
    findings.extend(duplicates(
        "load",
        config.loads.iter().map(|l| l.id.as_str()),
    ));

    let known: BTreeSet<&BusbarId> = config.busbars.iter().map(|b| &b.id).collect();
    let mut check_ref = |element: String, busbar: &BusbarId| {
        if !known.contains(busbar) {
            findings.push(Finding::DanglingBusbar {
                element,
                busbar: busbar.clone(),
            });
        }
    };
    for t in &config.busties {
        check_ref(format!("bustie '{}'", t.id), &t.endpoints.0);
        check_ref(format!("bustie '{}'", t.id), &t.endpoints.1);
    }
    for g in &config.generators {
        check_ref(format!("generator '{}'", g.id), &g.busbar);
    }
    for l in &config.loads {
        check_ref(format!("load '{}'", l.id), &l.busbar);
    }
    if let Some(tie) = &config.external_tie {
        check_ref(format!("external tie '{}'", tie.id), &tie.busbar);
    }

    let mut pairs: BTreeMap<(&BusbarId, &BusbarId), &BustieId> = BTreeMap::new();
    for t in &config.busties {
        let (a, b) = (&t.endpoints.0, &t.endpoints.1);
        if a == b {
            findings.push(Finding::BustieSelfLoop {
                bustie: t.id.clone(),
            });
            continue;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(other) = pairs.get(&key) {
            findings.push(Finding::DuplicateBustiePair {
                bustie: t.id.clone(),
                other: (*other).clone(),
            });
        } else {
            pairs.insert(key, &t.id);
        }
    }

    if n > 0 {
        let components = components_where(config, |_| true).len();
        if components > 1 {
            findings.push(Finding::DisconnectedTopology { components });
        }
    }

    for g in &config.generators {
        if !(g.rated_power > 0.0) {
            findings.push(Finding::NonPositiveRatedPower {
                generator: g.id.clone(),
                value: g.rated_power,
            });
        }
        if !(g.rated_apparent_power >= g.rated_power) {
            findings.push(Finding::ApparentBelowRated {
                generator: g.id.clone(),
            });
        }
        if !(g.inertia_constant > 0.0) {
            findings.push(Finding::NonPositiveInertia {
                generator: g.id.clone(),
                value: g.inertia_constant,
            });
        }
        for &(p, sr) in &g.sr_curve.0 {
            if !(sr >= 0.0) {
                findings.push(Finding::NegativeReserve {
                    generator: g.id.clone(),
                    power: p,
                    value: sr,
                });
            }
        }
        if g.sr_curve.0.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            findings.push(Finding::UnorderedSrCurve {
                generator: g.id.clone(),
            });
        }
    }

    for l in &config.loads {
        if l.priority == 0 {
            findings.push(Finding::ZeroPriority { load: l.id.clone() });
        }
    }

    ValidationReport { findings }
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakerState {
    Closed,
    Open,
}

impl BreakerState {
    pub fn is_closed(self) -> bool {
        self == BreakerState::Closed
    }

    pub fn from_closed(closed: bool) -> Self {
        if closed {
            BreakerState::Closed
        } else {
            BreakerState::Open
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReading {
    pub breaker: BreakerState,
    /// MW
    pub power: f64,
    /// Spinning reserve, MW
    pub sr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadReading {
    pub breaker: BreakerState,
    /// MW
    pub power: f64,
    /// Overrides the configured priority for this acquisition.
    pub priority: Option<u32>,
}

/// Breaker statuses and power measurements at one acquisition instant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    /// seconds
    pub timestamp: f64,
    pub generators: BTreeMap<GeneratorId, GeneratorReading>,
    pub loads: BTreeMap<LoadId, LoadReading>,
    pub busties: BTreeMap<BustieId, BreakerState>,
    pub external_tie: Option<BreakerState>,
    /// Power drawn from the external grid, MW (negative when exporting).
    pub imported_power: f64,
}

impl NetworkSnapshot {
    pub fn generator_closed(&self, id: &GeneratorId) -> bool {
        self.generators
            .get(id)
            .is_some_and(|r| r.breaker.is_closed())
    }

    pub fn load_closed(&self, id: &LoadId) -> bool {
        self.loads.get(id).is_some_and(|r| r.breaker.is_closed())
    }

    pub fn bustie_closed(&self, id: &BustieId) -> bool {
        self.busties.get(id).is_some_and(|b| b.is_closed())
    }

    pub fn tie_closed(&self) -> bool {
        self.external_tie.is_some_and(|b| b.is_closed())
    }

    /// Effective priority of a load: the snapshot override, else the configured value.
    pub fn priority_of(&self, load: &Load) -> u32 {
        self.loads
            .get(&load.id)
            .and_then(|r| r.priority)
            .unwrap_or(load.priority)
    }

    /// Fills each generator's reserve from its configured curve at the measured power.
    pub fn with_curve_reserves(mut self, config: &GridConfig) -> Self {
        for g in &config.generators {
            if let Some(r) = self.generators.get_mut(&g.id) {
                r.sr = if r.breaker.is_closed() {
                    g.sr_curve.evaluate(r.power)
                } else {
                    0.0
                };
            }
        }
        self
    }

    /// Every breaker closed, zero power, zero reserve.
    pub fn all_closed(config: &GridConfig) -> Self {
        Self {
            timestamp: 0.0,
            generators: config
                .generators
                .iter()
                .map(|g| {
                    (
                        g.id.clone(),
                        GeneratorReading {
                            breaker: BreakerState::Closed,
                            power: 0.0,
                            sr: 0.0,
                        },
                    )
                })
                .collect(),
            loads: config
                .loads
                .iter()
                .map(|l| {
                    (
                        l.id.clone(),
                        LoadReading {
                            breaker: BreakerState::Closed,
                            power: 0.0,
                            priority: None,
                        },
                    )
                })
                .collect(),
            busties: config
                .busties
                .iter()
                .map(|t| (t.id.clone(), BreakerState::Closed))
                .collect(),
            external_tie: config.active_tie().map(|_| BreakerState::Closed),
            imported_power: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("snapshot has no status for {kind} '{id}'")]
    InputIncomplete { kind: &'static str, id: String },
    #[error("snapshot: {0}")]
    InconsistentSnapshot(String),
}

/// Checks that a snapshot covers every element of the config and respects
/// the measurement invariants.
pub fn check_snapshot(config: &GridConfig, snapshot: &NetworkSnapshot) -> Result<(), GridError> {
    for t in &config.busties {
        if !snapshot.busties.contains_key(&t.id) {
            return Err(GridError::InputIncomplete {
                kind: "bustie",
                id: t.id.0.clone(),
            });
        }
    }
    for g in &config.generators {
        let Some(r) = snapshot.generators.get(&g.id) else {
            return Err(GridError::InputIncomplete {
                kind: "generator",
                id: g.id.0.clone(),
            });
        };
        if !r.power.is_finite() || !(r.sr >= 0.0) || !r.sr.is_finite() {
            return Err(GridError::InconsistentSnapshot(format!(
                "generator '{}' has invalid power/reserve ({}, {})",
                g.id, r.power, r.sr
            )));
        }
        if !r.breaker.is_closed() && r.power != 0.0 {
            return Err(GridError::InconsistentSnapshot(format!(
                "generator '{}' is open but carries {} MW",
                g.id, r.power
            )));
        }
    }
    for l in &config.loads {
        let Some(r) = snapshot.loads.get(&l.id) else {
            return Err(GridError::InputIncomplete {
                kind: "load",
                id: l.id.0.clone(),
            });
        };
        if !r.power.is_finite() {
            return Err(GridError::InconsistentSnapshot(format!(
                "load '{}' has invalid power {}",
                l.id, r.power
            )));
        }
        if !r.breaker.is_closed() && r.power != 0.0 {
            return Err(GridError::InconsistentSnapshot(format!(
                "load '{}' is open but carries {} MW",
                l.id, r.power
            )));
        }
    }
    if !snapshot.imported_power.is_finite() {
        return Err(GridError::InconsistentSnapshot(
            "imported power is not finite".into(),
        ));
    }
    if config.active_tie().is_some() && snapshot.external_tie.is_none() {
        return Err(GridError::InputIncomplete {
            kind: "external tie",
            id: config
                .active_tie()
                .map(|t| t.id.0.clone())
                .unwrap_or_default(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

/// One electrically connected island: the busbars joined by closed busties
/// and every element attached to them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubNetwork {
    pub busbars: Vec<BusbarId>,
    pub generators: Vec<GeneratorId>,
    pub loads: Vec<LoadId>,
    pub external_tie: Option<TieId>,
}

impl SubNetwork {
    pub fn contains_busbar(&self, id: &BusbarId) -> bool {
        self.busbars.contains(id)
    }

    pub fn label(&self) -> String {
        self.busbars
            .iter()
            .map(BusbarId::as_str)
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Busbar index sets of the components of the busbar graph whose edges are
/// the busties accepted by `closed`, ordered by smallest member busbar id.
pub(crate) fn components_where(
    config: &GridConfig,
    closed: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let n = config.busbars.len();
    let mut uf = UnionFind::<usize>::new(n);
    for (k, t) in config.busties.iter().enumerate() {
        if !closed(k) {
            continue;
        }
        if let (Some(a), Some(b)) = (
            config.busbar_index(&t.endpoints.0),
            config.busbar_index(&t.endpoints.1),
        ) {
            uf.union(a, b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    let min_id = |c: &Vec<usize>| c.iter().map(|&i| &config.busbars[i].id).min().cloned();
    comps.sort_by_key(|c| min_id(c));
    comps
}

pub(crate) fn subnetwork_from(config: &GridConfig, busbar_indices: &[usize]) -> SubNetwork {
    let mut busbars: Vec<BusbarId> = busbar_indices
        .iter()
        .map(|&i| config.busbars[i].id.clone())
        .collect();
    busbars.sort();
    let inside = |b: &BusbarId| busbars.contains(b);
    SubNetwork {
        generators: config
            .generators
            .iter()
            .filter(|g| inside(&g.busbar))
            .map(|g| g.id.clone())
            .collect(),
        loads: config
            .loads
            .iter()
            .filter(|l| inside(&l.busbar))
            .map(|l| l.id.clone())
            .collect(),
        external_tie: config
            .active_tie()
            .filter(|t| inside(&t.busbar))
            .map(|t| t.id.clone()),
        busbars,
    }
}

/// Splits the plant into the islands formed by the busties closed in `snapshot`.
pub fn partition(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
) -> Result<Vec<SubNetwork>, GridError> {
    for t in &config.busties {
        if !snapshot.busties.contains_key(&t.id) {
            return Err(GridError::InputIncomplete {
                kind: "bustie",
                id: t.id.0.clone(),
            });
        }
    }
    let comps = components_where(config, |k| snapshot.bustie_closed(&config.busties[k].id));
    Ok(comps.iter().map(|c| subnetwork_from(config, c)).collect())
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// A foreseen disturbance. Each one owns a column of the shedding matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    GeneratorTrip(GeneratorId),
    BustieOpen(BustieId),
    BuildingLoss(BuildingId),
    GridBlackout(TieId),
}

impl Event {
    pub fn label(&self) -> String {
        match self {
            Event::GeneratorTrip(id) => format!("TRIP:{id}"),
            Event::BustieOpen(id) => format!("BUSTIE:{id}"),
            Event::BuildingLoss(id) => format!("BUILDING:{id}"),
            Event::GridBlackout(id) => format!("BLACKOUT:{id}"),
        }
    }

    pub fn parse_label(label: &str) -> Option<Event> {
        let (kind, id) = label.split_once(':')?;
        if id.is_empty() {
            return None;
        }
        Some(match kind {
            "TRIP" => Event::GeneratorTrip(id.into()),
            "BUSTIE" => Event::BustieOpen(id.into()),
            "BUILDING" => Event::BuildingLoss(id.into()),
            "BLACKOUT" => Event::GridBlackout(id.into()),
            _ => return None,
        })
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Ordered list of events; an event's position is its shedding-matrix column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventCatalog {
    events: Vec<Event>,
}

impl EventCatalog {
    pub fn new(events: Vec<Event>) -> Self {
        Self { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Event> {
        self.events.get(index)
    }

    pub fn index_of(&self, event: &Event) -> Option<usize> {
        self.events.iter().position(|e| e == event)
    }

    pub fn labels(&self) -> Vec<String> {
        self.events.iter().map(Event::label).collect()
    }
}

/// Canonical catalog: generator trips, bustie openings, building losses and
/// the external-grid blackout, each group sorted by id.
pub fn enumerate_events(config: &GridConfig) -> EventCatalog {
    let mut gens: Vec<&GeneratorId> = config.generators.iter().map(|g| &g.id).collect();
    gens.sort();
    let mut ties: Vec<&BustieId> = config.busties.iter().map(|t| &t.id).collect();
    ties.sort();

    let mut events: Vec<Event> = gens
        .into_iter()
        .map(|g| Event::GeneratorTrip(g.clone()))
        .collect();
    events.extend(ties.into_iter().map(|t| Event::BustieOpen(t.clone())));
    events.extend(config.buildings().into_iter().map(Event::BuildingLoss));
    if let Some(tie) = config.active_tie() {
        events.push(Event::GridBlackout(tie.id.clone()));
    }
    EventCatalog::new(events)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn chain_config() -> GridConfig {
        let bus = |id: &str| Busbar {
            id: id.into(),
            name: format!("Busbar {id}"),
        };
        let gen = |id: &str, bus: &str, bld: &str| Generator {
            id: id.into(),
            busbar: bus.into(),
            building: bld.into(),
            rated_power: 25.0,
            rated_apparent_power: 31.25,
            inertia_constant: 3.0,
            sr_curve: SrCurve::constant(5.0),
        };
        let load = |i: usize| Load {
            id: format!("L{i:02}").into(),
            busbar: ["A", "B", "C"][i % 3].into(),
            priority: 1 + (i as u32 % 3),
            sheddable: i != 0,
        };
        GridConfig {
            busbars: vec![bus("A"), bus("B"), bus("C")],
            busties: vec![
                Bustie {
                    id: "T1".into(),
                    endpoints: ("A".into(), "B".into()),
                },
                Bustie {
                    id: "T2".into(),
                    endpoints: ("B".into(), "C".into()),
                },
            ],
            generators: vec![
                gen("G1", "A", "GT1"),
                gen("G2", "A", "GT1"),
                gen("G3", "C", "GT2"),
                gen("G4", "C", "GT2"),
            ],
            loads: (0..10).map(load).collect(),
            external_tie: Some(ExternalTie {
                id: "X1".into(),
                busbar: "B".into(),
                present: true,
            }),
            nominal_frequency: 50.0,
        }
    }

    fn with_ties(config: &GridConfig, t1: bool, t2: bool) -> NetworkSnapshot {
        let mut s = NetworkSnapshot::all_closed(config);
        s.busties.insert("T1".into(), BreakerState::from_closed(t1));
        s.busties.insert("T2".into(), BreakerState::from_closed(t2));
        s
    }

    fn busbar_sets(parts: &[SubNetwork]) -> Vec<Vec<&str>> {
        parts
            .iter()
            .map(|p| p.busbars.iter().map(BusbarId::as_str).collect())
            .collect()
    }

    #[test]
    fn reference_shape_is_valid() {
        let report = validate_config(&chain_config());
        assert!(report.is_valid(), "{:?}", report.findings);
    }

    #[test]
    fn dangling_load_busbar_is_reported_once() {
        let mut c = chain_config();
        c.loads[4].busbar = "B9".into();
        let report = validate_config(&c);
        assert_eq!(report.findings.len(), 1);
        assert!(matches!(
            &report.findings[0],
            Finding::DanglingBusbar { busbar, .. } if busbar.as_str() == "B9"
        ));
    }

    #[test]
    fn four_busbars_rejected() {
        let mut c = chain_config();
        c.busbars.push(Busbar {
            id: "D".into(),
            name: "D".into(),
        });
        c.busties.push(Bustie {
            id: "T3".into(),
            endpoints: ("C".into(), "D".into()),
        });
        let report = validate_config(&c);
        assert_eq!(report.findings, vec![Finding::BusbarCount { count: 4 }]);
    }

    #[test]
    fn findings_cover_generator_and_tie_invariants() {
        let mut c = chain_config();
        c.generators[0].rated_power = 0.0;
        c.generators[1].rated_apparent_power = 10.0;
        c.generators[2].inertia_constant = -1.0;
        c.generators[3].sr_curve = SrCurve(vec![(5.0, 1.0), (2.0, -1.0)]);
        c.busties[1].endpoints = ("A".into(), "B".into());
        c.loads[3].priority = 0;
        c.nominal_frequency = 0.0;
        let report = validate_config(&c);
        let rendered: Vec<String> = report.findings.iter().map(|f| f.to_string()).collect();
        assert_eq!(report.findings.len(), 9, "{rendered:#?}");
        assert!(matches!(
            report.findings[0],
            Finding::NonPositiveFrequency { .. }
        ));
        assert!(matches!(
            report.findings[1],
            Finding::DuplicateBustiePair { .. }
        ));
        assert!(matches!(
            report.findings[2],
            Finding::DisconnectedTopology { components: 2 }
        ));
        // deterministic
        assert_eq!(validate_config(&c), report);
    }

    #[test]
    fn partition_chain_cases() {
        let c = chain_config();
        let all = partition(&c, &with_ties(&c, true, true)).unwrap();
        assert_eq!(busbar_sets(&all), vec![vec!["A", "B", "C"]]);
        assert_eq!(all[0].generators.len(), 4);
        assert_eq!(all[0].external_tie.as_ref().unwrap().as_str(), "X1");

        let none = partition(&c, &with_ties(&c, false, false)).unwrap();
        assert_eq!(busbar_sets(&none), vec![vec!["A"], vec!["B"], vec!["C"]]);

        let split = partition(&c, &with_ties(&c, false, true)).unwrap();
        assert_eq!(busbar_sets(&split), vec![vec!["A"], vec!["B", "C"]]);
        assert_eq!(split[0].generators.len(), 2);
        assert_eq!(split[1].external_tie.as_ref().unwrap().as_str(), "X1");
    }

    #[test]
    fn partition_requires_every_bustie() {
        let c = chain_config();
        let mut s = NetworkSnapshot::all_closed(&c);
        s.busties.remove(&BustieId::from("T2"));
        assert_eq!(
            partition(&c, &s),
            Err(GridError::InputIncomplete {
                kind: "bustie",
                id: "T2".into()
            })
        );
    }

    #[test]
    fn event_counts() {
        let c = chain_config();
        let cat = enumerate_events(&c);
        assert_eq!(cat.len(), 4 + 2 + 2 + 1);
        assert_eq!(
            cat.labels(),
            vec![
                "TRIP:G1",
                "TRIP:G2",
                "TRIP:G3",
                "TRIP:G4",
                "BUSTIE:T1",
                "BUSTIE:T2",
                "BUILDING:GT1",
                "BUILDING:GT2",
                "BLACKOUT:X1"
            ]
        );
        assert_eq!(enumerate_events(&c), cat);

        let mut single = chain_config();
        single.busbars.truncate(1);
        single.busties.clear();
        single.generators.truncate(1);
        single.external_tie = None;
        assert_eq!(enumerate_events(&single).len(), 2);

        let mut two = single.clone();
        let mut g = two.generators[0].clone();
        g.id = "G9".into();
        g.building = "GT9".into();
        two.generators.push(g);
        assert_eq!(enumerate_events(&two).len(), 4);

        let mut absent = chain_config();
        absent.external_tie.as_mut().unwrap().present = false;
        assert_eq!(enumerate_events(&absent).len(), 8);
    }

    #[test]
    fn labels_round_trip() {
        for e in enumerate_events(&chain_config()).events() {
            assert_eq!(Event::parse_label(&e.label()).as_ref(), Some(e));
        }
        assert_eq!(Event::parse_label("TRIP:"), None);
        assert_eq!(Event::parse_label("FOO:G1"), None);
    }

    #[test]
    fn sr_curve_step_semantics() {
        let curve = SrCurve(vec![(0.0, 6.0), (8.0, 0.0), (14.0, 4.0)]);
        assert_eq!(curve.evaluate(-1.0), 0.0);
        assert_eq!(curve.evaluate(0.0), 6.0);
        assert_eq!(curve.evaluate(7.99), 6.0);
        assert_eq!(curve.evaluate(8.0), 0.0);
        assert_eq!(curve.evaluate(13.9), 0.0);
        assert_eq!(curve.evaluate(20.0), 4.0);
        assert_eq!(curve.zero_bands(), vec![(8.0, 14.0)]);
        assert_eq!(SrCurve::default().evaluate(3.0), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn reach(n: usize, edges: &[(usize, usize)], from: usize) -> BTreeSet<usize> {
            let mut seen = BTreeSet::from([from]);
            let mut stack = vec![from];
            while let Some(v) = stack.pop() {
                for &(a, b) in edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == v && y < n && seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
            }
            seen
        }

        proptest! {
            #[test]
            fn partition_matches_dfs(n in 1usize..=3, mask in 0u8..8, triangle in any::<bool>()) {
                let mut c = chain_config();
                c.busbars.truncate(n);
                let all_pairs = [(0usize, 1usize), (1, 2), (0, 2)];
                let pairs: Vec<(usize, usize)> = all_pairs
                    .iter()
                    .copied()
                    .filter(|&(a, b)| a < n && b < n)
                    .take(if triangle { 3 } else { n.saturating_sub(1) })
                    .collect();
                c.busties = pairs.iter().enumerate().map(|(k, &(a, b))| Bustie {
                    id: format!("T{k}").into(),
                    endpoints: (c.busbars[a].id.clone(), c.busbars[b].id.clone()),
                }).collect();
                let kept: Vec<BusbarId> = c.busbars.iter().map(|b| b.id.clone()).collect();
                c.generators.retain(|g| kept.contains(&g.busbar));
                c.loads.retain(|l| kept.contains(&l.busbar));
                c.external_tie = None;
                let mut s = NetworkSnapshot::all_closed(&c);
                let mut closed_edges = Vec::new();
                for (k, t) in c.busties.iter().enumerate() {
                    let closed = mask & (1 << k) != 0;
                    s.busties.insert(t.id.clone(), BreakerState::from_closed(closed));
                    if closed { closed_edges.push(pairs[k]); }
                }
                let parts = partition(&c, &s).unwrap();
                let mut union = BTreeSet::new();
                for p in &parts {
                    let idx: BTreeSet<usize> =
                        p.busbars.iter().map(|b| c.busbar_index(b).unwrap()).collect();
                    let first = *idx.iter().next().unwrap();
                    prop_assert_eq!(&reach(n, &closed_edges, first), &idx);
                    for i in &idx { prop_assert!(union.insert(*i)); }
                }
                prop_assert_eq!(union.len(), n);
                let loads: usize = parts.iter().map(|p| p.loads.len()).sum();
                prop_assert_eq!(loads, c.loads.len());
            }

            #[test]
            fn zero_band_evaluates_to_zero(
                start in 0.0f64..20.0, width in 0.1f64..10.0, frac in 0.0f64..1.0, sr in 0.1f64..9.0
            ) {
                let curve = SrCurve(vec![(0.0, sr), (start + 0.01, 0.0), (start + 0.01 + width, sr)]);
                for (lo, hi) in curve.zero_bands() {
                    let p = lo + frac * (hi - lo);
                    if p < hi {
                        prop_assert_eq!(curve.evaluate(p), 0.0);
                    }
                }
            }
        }
    }
}
