//! Load-selection engine: power mismatch per foreseen event and the shedding
//! matrix built from it.
//!
//! This is the slow loop. It runs once per acquisition period on a
//! [`NetworkSnapshot`] and publishes a [`SheddingMatrix`] that the fast
//! event-detection loop consults when a breaker opens.
//!
//! All sums run over elements in configuration order so that the generated
//! Structured Text reproduces the same floating-point results.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid_model::{
    check_snapshot, components_where, subnetwork_from, BuildingId, BustieId, Event, EventCatalog,
    GeneratorId, GridConfig, GridError, LoadId, NetworkSnapshot, SubNetwork,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LseError {
    #[error("unknown {kind} '{id}'")]
    NotFound { kind: &'static str, id: String },
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("cannot shed enough load for {event}: short by {shortfall} MW")]
    InfeasibleShed {
        event: String,
        shortfall: f64,
        /// Every candidate of the deficient sub-network(s) marked.
        fallback: Box<Selection>,
    },
}

/// Power mismatch of one sub-network for one event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "mw", rename_all = "kebab-case")]
pub enum Mismatch {
    /// The sub-network is not touched by the event.
    NoAction,
    Mw(f64),
}

impl Mismatch {
    /// Shedding is required iff the mismatch is strictly positive.
    pub fn requires_shedding(self) -> bool {
        matches!(self, Mismatch::Mw(v) if v > 0.0)
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::NoAction => f.write_str("no-action"),
            Mismatch::Mw(v) => write!(f, "{v} MW"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubnetMismatch {
    pub subnetwork: SubNetwork,
    pub pm: Mismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMismatch {
    pub event: Event,
    pub entries: Vec<SubnetMismatch>,
}

impl PowerMismatch {
    pub fn max_value(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| match e.pm {
                Mismatch::Mw(v) => Some(v),
                Mismatch::NoAction => None,
            })
            .reduce(f64::max)
    }
}

/// Acquisition view of a snapshot, indexed like the config vectors. Open
/// elements contribute zero power and zero reserve.
struct View<'a> {
    config: &'a GridConfig,
    gen_bus: Vec<usize>,
    gen_closed: Vec<bool>,
    gen_p: Vec<f64>,
    gen_sr: Vec<f64>,
    load_bus: Vec<usize>,
    load_closed: Vec<bool>,
    load_p: Vec<f64>,
    load_priority: Vec<u32>,
    bustie_closed: Vec<bool>,
    ext: Option<(usize, bool)>,
    import: f64,
}

impl<'a> View<'a> {
    fn new(config: &'a GridConfig, s: &NetworkSnapshot) -> Result<Self, LseError> {
        check_snapshot(config, s)?;
        let bus = |b| {
            config.busbar_index(b).ok_or_else(|| LseError::NotFound {
                kind: "busbar",
                id: b.to_string(),
            })
        };
        let mut v = View {
            config,
            gen_bus: Vec::with_capacity(config.generators.len()),
            gen_closed: Vec::new(),
            gen_p: Vec::new(),
            gen_sr: Vec::new(),
            load_bus: Vec::with_capacity(config.loads.len()),
            load_closed: Vec::new(),
            load_p: Vec::new(),
            load_priority: Vec::new(),
            bustie_closed: config
                .busties
                .iter()
                .map(|t| s.bustie_closed(&t.id))
                .collect(),
            ext: None,
            import: s.imported_power,
        };
        for g in &config.generators {
            let r = s.generators[&g.id];
            let closed = r.breaker.is_closed();
            v.gen_bus.push(bus(&g.busbar)?);
            v.gen_closed.push(closed);
            v.gen_p.push(if closed { r.power } else { 0.0 });
            v.gen_sr.push(if closed { r.sr } else { 0.0 });
        }
        for l in &config.loads {
            let r = s.loads[&l.id];
            let closed = r.breaker.is_closed();
            v.load_bus.push(bus(&l.busbar)?);
            v.load_closed.push(closed);
            v.load_p.push(if closed { r.power } else { 0.0 });
            v.load_priority.push(s.priority_of(l));
        }
        if let Some(t) = config.active_tie() {
            v.ext = Some((bus(&t.busbar)?, s.tie_closed()));
        }
        Ok(v)
    }

    fn components(&self, forced_open: Option<usize>) -> Vec<Vec<usize>> {
        components_where(self.config, |k| {
            self.bustie_closed[k] && Some(k) != forced_open
        })
    }

    fn reserve_in(&self, comp: &[usize], exclude: impl Fn(usize) -> bool) -> f64 {
        let mut sr = 0.0;
        for g in 0..self.gen_bus.len() {
            if self.gen_closed[g] && comp.contains(&self.gen_bus[g]) && !exclude(g) {
                sr += self.gen_sr[g];
            }
        }
        sr
    }

    fn entries(
        &self,
        comps: &[Vec<usize>],
        mut pm_of: impl FnMut(&[usize]) -> Mismatch,
    ) -> Vec<SubnetMismatch> {
        comps
            .iter()
            .map(|c| SubnetMismatch {
                subnetwork: subnetwork_from(self.config, c),
                pm: pm_of(c),
            })
            .collect()
    }

    fn generator_trip(&self, gi: usize) -> Vec<SubnetMismatch> {
        let comps = self.components(None);
        self.entries(&comps, |c| {
            if !c.contains(&self.gen_bus[gi]) {
                return Mismatch::NoAction;
            }
            let sr_tot = self.reserve_in(c, |_| false);
            Mismatch::Mw(self.gen_p[gi] - (sr_tot - self.gen_sr[gi]))
        })
    }

    fn bustie_open(&self, ti: usize) -> Vec<SubnetMismatch> {
        let pre = self.components(None);
        let post = self.components(Some(ti));
        let a = self
            .config
            .busbar_index(&self.config.busties[ti].endpoints.0)
            .unwrap_or(usize::MAX);
        let host = pre.iter().find(|c| c.contains(&a));
        self.entries(&post, |c| {
            if !host.is_some_and(|h| c.iter().all(|b| h.contains(b))) {
                return Mismatch::NoAction;
            }
            let mut load = 0.0;
            for l in 0..self.load_bus.len() {
                if self.load_closed[l] && c.contains(&self.load_bus[l]) {
                    load += self.load_p[l];
                }
            }
            let mut gen = 0.0;
            for g in 0..self.gen_bus.len() {
                if self.gen_closed[g] && c.contains(&self.gen_bus[g]) {
                    gen += self.gen_p[g];
                }
            }
            if let Some((bus, true)) = self.ext {
                if c.contains(&bus) {
                    gen += self.import;
                }
            }
            let sr = self.reserve_in(c, |_| false);
            Mismatch::Mw(load - gen - sr)
        })
    }

    fn building_loss(&self, members: &[usize]) -> Vec<SubnetMismatch> {
        let comps = self.components(None);
        self.entries(&comps, |c| {
            if !members.iter().any(|&g| c.contains(&self.gen_bus[g])) {
                return Mismatch::NoAction;
            }
            let mut lost = 0.0;
            for &g in members {
                if self.gen_closed[g] && c.contains(&self.gen_bus[g]) {
                    lost += self.gen_p[g];
                }
            }
            let survivors = self.reserve_in(c, |g| members.contains(&g));
            Mismatch::Mw(lost - survivors)
        })
    }

    fn grid_blackout(&self, bus: usize) -> Vec<SubnetMismatch> {
        let comps = self.components(None);
        self.entries(&comps, |c| {
            if !c.contains(&bus) {
                return Mismatch::NoAction;
            }
            Mismatch::Mw(self.import - self.reserve_in(c, |_| false))
        })
    }

    /// Candidate load indices of a sub-network in shedding order: ascending
    /// priority, then descending measured power, then ascending load id.
    fn candidates(&self, sub: &SubNetwork) -> Vec<usize> {
        let mut c: Vec<usize> = (0..self.config.loads.len())
            .filter(|&l| {
                self.config.loads[l].sheddable
                    && self.load_closed[l]
                    && sub.contains_busbar(&self.config.loads[l].busbar)
            })
            .collect();
        c.sort_by(|&a, &b| self.shed_order(a, b));
        c
    }

    fn shed_order(&self, a: usize, b: usize) -> Ordering {
        self.load_priority[a]
            .cmp(&self.load_priority[b])
            .then_with(|| {
                self.load_p[b]
                    .partial_cmp(&self.load_p[a])
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.config.loads[a].id.cmp(&self.config.loads[b].id))
    }

    fn select(&self, pm: &PowerMismatch) -> Result<Selection, LseError> {
        let mut selection = Selection::default();
        let mut shortfall = 0.0;
        for entry in &pm.entries {
            let Mismatch::Mw(target) = entry.pm else {
                continue;
            };
            if !(target > 0.0) {
                continue;
            }
            let order = self.candidates(&entry.subnetwork);
            let mut ps = 0.0;
            let mut marked = Vec::new();
            for &l in &order {
                ps += self.load_p[l];
                marked.push(l);
                if ps > target {
                    break;
                }
            }
            let feasible = ps > target;
            if !feasible {
                shortfall += target - ps;
            }
            selection
                .marked
                .extend(marked.iter().map(|&l| self.config.loads[l].id.clone()));
            selection.subnets.push(SubnetShed {
                busbars: entry
                    .subnetwork
                    .busbars
                    .iter()
                    .map(|b| b.to_string())
                    .collect(),
                pm: target,
                ps,
                last_marked: marked.last().map_or(0.0, |&l| self.load_p[l]),
                feasible,
            });
        }
        if selection.subnets.iter().all(|s| s.feasible) {
            Ok(selection)
        } else {
            Err(LseError::InfeasibleShed {
                event: pm.event.label(),
                shortfall,
                fallback: Box::new(selection),
            })
        }
    }
}

fn gen_index(config: &GridConfig, id: &GeneratorId) -> Result<usize, LseError> {
    config
        .generator_index(id)
        .ok_or_else(|| LseError::NotFound {
            kind: "generator",
            id: id.to_string(),
        })
}

fn building_members(config: &GridConfig, id: &BuildingId) -> Result<Vec<usize>, LseError> {
    let members: Vec<usize> = config
        .generators
        .iter()
        .enumerate()
        .filter(|(_, g)| &g.building == id)
        .map(|(i, _)| i)
        .collect();
    if members.is_empty() {
        return Err(LseError::NotFound {
            kind: "building",
            id: id.to_string(),
        });
    }
    Ok(members)
}

/// `PM = P_gen − (SR_tot − SR_gen)` for the sub-network hosting the generator.
pub fn compute_pm_generator_trip(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
    gen_id: &GeneratorId,
) -> Result<PowerMismatch, LseError> {
    let gi = gen_index(config, gen_id)?;
    let view = View::new(config, snapshot)?;
    Ok(PowerMismatch {
        event: Event::GeneratorTrip(gen_id.clone()),
        entries: view.generator_trip(gi),
    })
}

/// Opens the bustie hypothetically; every resulting island of the split
/// network gets `PM = load − generation − reserve`, with grid import counted
/// as generation where the tie lands.
pub fn compute_pm_bustie_open(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
    bustie_id: &BustieId,
) -> Result<PowerMismatch, LseError> {
    let ti = config
        .bustie_index(bustie_id)
        .ok_or_else(|| LseError::NotFound {
            kind: "bustie",
            id: bustie_id.to_string(),
        })?;
    let view = View::new(config, snapshot)?;
    if !view.bustie_closed[ti] {
        return Err(LseError::Precondition(format!(
            "bustie '{bustie_id}' is already open"
        )));
    }
    Ok(PowerMismatch {
        event: Event::BustieOpen(bustie_id.clone()),
        entries: view.bustie_open(ti),
    })
}

/// Lost generation of the building minus the reserve of the surviving
/// generators, per sub-network hosting any of the building's units.
pub fn compute_pm_building_loss(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
    building_id: &BuildingId,
) -> Result<PowerMismatch, LseError> {
    let members = building_members(config, building_id)?;
    let view = View::new(config, snapshot)?;
    Ok(PowerMismatch {
        event: Event::BuildingLoss(building_id.clone()),
        entries: view.building_loss(&members),
    })
}

/// `PM = import − SR` of the closed generators in the tie's sub-network.
pub fn compute_pm_grid_blackout(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
) -> Result<PowerMismatch, LseError> {
    let tie = config.active_tie().ok_or_else(|| LseError::NotFound {
        kind: "external tie",
        id: String::new(),
    })?;
    let view = View::new(config, snapshot)?;
    let Some((bus, closed)) = view.ext else {
        unreachable!("active tie has a view entry");
    };
    if !closed {
        return Err(LseError::Precondition(format!(
            "external tie '{}' is already open",
            tie.id
        )));
    }
    Ok(PowerMismatch {
        event: Event::GridBlackout(tie.id.clone()),
        entries: view.grid_blackout(bus),
    })
}

/// Dispatches to the mismatch computation matching `event`.
pub fn compute_pm(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
    event: &Event,
) -> Result<PowerMismatch, LseError> {
    match event {
        Event::GeneratorTrip(id) => compute_pm_generator_trip(config, snapshot, id),
        Event::BustieOpen(id) => compute_pm_bustie_open(config, snapshot, id),
        Event::BuildingLoss(id) => compute_pm_building_loss(config, snapshot, id),
        Event::GridBlackout(id) => match config.active_tie() {
            Some(t) if &t.id == id => compute_pm_grid_blackout(config, snapshot),
            _ => Err(LseError::NotFound {
                kind: "external tie",
                id: id.to_string(),
            }),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubnetShed {
    pub busbars: Vec<String>,
    pub pm: f64,
    pub ps: f64,
    /// Power of the last load marked, 0 when nothing was marked.
    pub last_marked: f64,
    pub feasible: bool,
}

/// Loads chosen for one event.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// In shedding order, sub-network by sub-network.
    pub marked: Vec<LoadId>,
    pub subnets: Vec<SubnetShed>,
}

impl Selection {
    pub fn power_shed(&self) -> f64 {
        self.subnets.iter().map(|s| s.ps).sum()
    }
}

/// Greedy priority scan: in every sub-network with a positive mismatch, marks
/// candidates in shedding order until the shed power strictly exceeds it.
pub fn select_loads(
    pm: &PowerMismatch,
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
) -> Result<Selection, LseError> {
    View::new(config, snapshot)?.select(pm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ColumnStatus {
    /// No sub-network has a positive mismatch.
    NoAction,
    Shed {
        ps: f64,
    },
    /// Every candidate is marked and still not enough.
    Infeasible {
        shortfall: f64,
    },
    /// The element defining the event is already out of service.
    TargetOpen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnInfo {
    pub status: ColumnStatus,
    pub mismatch: Option<PowerMismatch>,
    pub selection: Selection,
}

/// Loads × events binary matrix; entry `true` means shed the load on the event.
#[derive(Debug, Clone, PartialEq)]
pub struct SheddingMatrix {
    load_ids: Vec<LoadId>,
    catalog: EventCatalog,
    /// Row-major, `load_ids.len() × catalog.len()`.
    entries: Vec<bool>,
    columns: Vec<ColumnInfo>,
    timestamp: f64,
    warnings: Vec<String>,
}

impl SheddingMatrix {
    pub fn empty(config: &GridConfig, catalog: EventCatalog) -> Self {
        let rows = config.loads.len();
        let cols = catalog.len();
        Self {
            load_ids: config.loads.iter().map(|l| l.id.clone()).collect(),
            entries: vec![false; rows * cols],
            columns: (0..cols)
                .map(|_| ColumnInfo {
                    status: ColumnStatus::NoAction,
                    mismatch: None,
                    selection: Selection::default(),
                })
                .collect(),
            catalog,
            timestamp: 0.0,
            warnings: Vec::new(),
        }
    }

    pub fn from_entries(
        load_ids: Vec<LoadId>,
        catalog: EventCatalog,
        rows: Vec<Vec<bool>>,
        timestamp: f64,
    ) -> Self {
        let cols = catalog.len();
        Self {
            entries: rows.into_iter().flatten().collect(),
            columns: (0..cols)
                .map(|_| ColumnInfo {
                    status: ColumnStatus::NoAction,
                    mismatch: None,
                    selection: Selection::default(),
                })
                .collect(),
            load_ids,
            catalog,
            timestamp,
            warnings: Vec::new(),
        }
    }

    pub fn load_ids(&self) -> &[LoadId] {
        &self.load_ids
    }

    pub fn catalog(&self) -> &EventCatalog {
        &self.catalog
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n_rows(&self) -> usize {
        self.load_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.catalog.len()
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.entries[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<bool> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        (0..self.n_rows())
            .map(|r| (0..self.n_cols()).map(|c| self.get(r, c)).collect())
            .collect()
    }

    /// Loads marked in a column, in row order.
    pub fn loads_to_shed(&self, col: usize) -> Vec<&LoadId> {
        (0..self.n_rows())
            .filter(|&r| self.get(r, col))
            .map(|r| &self.load_ids[r])
            .collect()
    }

    pub fn column_info(&self, col: usize) -> &ColumnInfo {
        &self.columns[col]
    }

    pub fn infeasible_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c.status, ColumnStatus::Infeasible { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Same binary content, ignoring diagnostics.
    pub fn same_entries(&self, other: &SheddingMatrix) -> bool {
        self.load_ids == other.load_ids
            && self.catalog == other.catalog
            && self.entries == other.entries
    }
}

fn target_open(view: &View<'_>, event: &Event) -> bool {
    let config = view.config;
    match event {
        Event::GeneratorTrip(id) => config
            .generator_index(id)
            .is_some_and(|g| !view.gen_closed[g]),
        Event::BustieOpen(id) => config
            .bustie_index(id)
            .is_some_and(|t| !view.bustie_closed[t]),
        Event::BuildingLoss(id) => config
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| &g.building == id)
            .all(|(g, _)| !view.gen_closed[g]),
        Event::GridBlackout(_) => !matches!(view.ext, Some((_, true))),
    }
}

fn column_mismatch(view: &View<'_>, event: &Event) -> Result<PowerMismatch, LseError> {
    let config = view.config;
    let entries = match event {
        Event::GeneratorTrip(id) => view.generator_trip(gen_index(config, id)?),
        Event::BustieOpen(id) => {
            let ti = config.bustie_index(id).ok_or_else(|| LseError::NotFound {
                kind: "bustie",
                id: id.to_string(),
            })?;
            view.bustie_open(ti)
        }
        Event::BuildingLoss(id) => view.building_loss(&building_members(config, id)?),
        Event::GridBlackout(id) => {
            let (bus, _) = view.ext.ok_or_else(|| LseError::NotFound {
                kind: "external tie",
                id: id.to_string(),
            })?;
            view.grid_blackout(bus)
        }
    };
    Ok(PowerMismatch {
        event: event.clone(),
        entries,
    })
}

/// Builds every column of the shedding matrix for `snapshot`.
///
/// Columns of events whose defining element is already open are all-zero.
/// An infeasible column marks every candidate of the deficient sub-network(s)
/// and records a warning; other columns are unaffected.
pub fn build_shedding_matrix(
    config: &GridConfig,
    snapshot: &NetworkSnapshot,
    catalog: &EventCatalog,
) -> Result<SheddingMatrix, LseError> {
    let view = View::new(config, snapshot)?;
    let mut matrix = SheddingMatrix::empty(config, catalog.clone());
    matrix.timestamp = snapshot.timestamp;
    let cols = catalog.len();

    for (col, event) in catalog.events().iter().enumerate() {
        if target_open(&view, event) {
            matrix.columns[col].status = ColumnStatus::TargetOpen;
            continue;
        }
        let pm = column_mismatch(&view, event)?;
        let (selection, status) = match view.select(&pm) {
            Ok(sel) if sel.marked.is_empty() => (sel, ColumnStatus::NoAction),
            Ok(sel) => {
                let ps = sel.power_shed();
                (sel, ColumnStatus::Shed { ps })
            }
            Err(LseError::InfeasibleShed {
                event,
                shortfall,
                fallback,
            }) => {
                matrix.warnings.push(format!(
                    "{event}: candidates exhausted, short by {shortfall} MW; shedding every candidate"
                ));
                // the scan exhausted every candidate of the deficient sub-networks
                let sel = *fallback;
                (sel, ColumnStatus::Infeasible { shortfall })
            }
            Err(e) => return Err(e),
        };
        for id in &selection.marked {
            if let Some(row) = config.load_index(id) {
                matrix.entries[row * cols + col] = true;
            }
        }
        matrix.columns[col] = ColumnInfo {
            status,
            mismatch: Some(pm),
            selection,
        };
    }
    Ok(matrix)
}

/// LSE refresh period, constrained to the 0.5–2 s acquisition band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LsePeriod(f64);

impl LsePeriod {
    pub const MIN: f64 = 0.5;
    pub const MAX: f64 = 2.0;

    pub fn new(seconds: f64) -> Result<Self, String> {
        if (Self::MIN..=Self::MAX).contains(&seconds) {
            Ok(Self(seconds))
        } else {
            Err(format!(
                "LSE period must lie in [{}, {}] s, got {seconds}",
                Self::MIN,
                Self::MAX
            ))
        }
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl Default for LsePeriod {
    fn default() -> Self {
        Self(1.0)
    }
}

impl TryFrom<f64> for LsePeriod {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        Self::new(v)
    }
}

impl From<LsePeriod> for f64 {
    fn from(p: LsePeriod) -> f64 {
        p.0
    }
}

/// Slot through which the LSE publishes matrices to the fast loop. Readers
/// always see a complete matrix: publication swaps the whole `Arc`.
#[derive(Debug, Default)]
pub struct MatrixSlot {
    current: RwLock<Option<Arc<SheddingMatrix>>>,
}

impl MatrixSlot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn publish(&self, matrix: SheddingMatrix) {
        let next = Arc::new(matrix);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Some(next);
    }

    pub fn current(&self) -> Option<Arc<SheddingMatrix>> {
        self.current
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }
}
