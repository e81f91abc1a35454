//! Event detection and shedding action: the fast loop.
//!
//! Compares consecutive snapshots, maps breaker transitions onto catalog
//! events and fires the matching shedding-matrix column. After any handled
//! event the engine is inhibited for a settle window; events arriving in that
//! window are recorded for the backup (underfrequency) path instead.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid_model::{Event, EventCatalog, GridConfig, LoadId, NetworkSnapshot};
use crate::lse::SheddingMatrix;

/// Default settle window after a shedding action, seconds.
pub const DEFAULT_SETTLE_TIME: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedEvent {
    /// Column in the catalog the event was detected against.
    pub index: usize,
    pub event: Event,
    /// seconds
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripCommand {
    pub load: LoadId,
    /// seconds
    pub issued_at: f64,
    pub event: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Armed,
    Inhibited { until: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    pub mode: Mode,
    /// Last matrix published by the load-selection engine.
    pub matrix: Option<Arc<SheddingMatrix>>,
}

impl EngineState {
    pub fn armed() -> Self {
        Self {
            mode: Mode::Armed,
            matrix: None,
        }
    }

    pub fn is_armed(&self) -> bool {
        self.mode == Mode::Armed
    }
}

impl Default for EngineState {
    fn default() -> Self {
        Self::armed()
    }
}

/// Catalog events whose defining breakers opened between `prev` and `next`,
/// in catalog order.
///
/// A building event fires when every generator of the building is open in
/// `next` and at least one was closed in `prev`; it then replaces the
/// individual trip events of that building's generators.
pub fn detect(
    config: &GridConfig,
    catalog: &EventCatalog,
    prev: &NetworkSnapshot,
    next: &NetworkSnapshot,
) -> Vec<DetectedEvent> {
    let opened_gen = |id| prev.generator_closed(id) && !next.generator_closed(id);

    let lost_buildings: Vec<_> = config
        .buildings()
        .into_iter()
        .filter(|b| {
            let mut members = config.generators.iter().filter(|g| &g.building == b);
            let all_open = members.clone().all(|g| !next.generator_closed(&g.id));
            all_open && members.any(|g| prev.generator_closed(&g.id))
        })
        .collect();

    catalog
        .events()
        .iter()
        .enumerate()
        .filter(|(_, e)| match e {
            Event::GeneratorTrip(id) => {
                opened_gen(id)
                    && !config
                        .generator(id)
                        .is_some_and(|g| lost_buildings.contains(&g.building))
            }
            Event::BustieOpen(id) => prev.bustie_closed(id) && !next.bustie_closed(id),
            Event::BuildingLoss(id) => lost_buildings.contains(id),
            Event::GridBlackout(_) => prev.tie_closed() && !next.tie_closed(),
        })
        .map(|(index, e)| DetectedEvent {
            index,
            event: e.clone(),
            timestamp: next.timestamp,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActOutcome {
    pub commands: Vec<TripCommand>,
    pub state: EngineState,
    /// Set when the engine was inhibited: the event goes to the backup path.
    pub deferred: Option<DetectedEvent>,
}

/// Fires the matrix column of `event`. Commands target loads marked in the
/// column whose breaker is still closed in `live`.
pub fn act(
    state: &EngineState,
    event: &DetectedEvent,
    matrix: &SheddingMatrix,
    live: &NetworkSnapshot,
    settle_time: f64,
) -> ActOutcome {
    if !state.is_armed() {
        return ActOutcome {
            commands: Vec::new(),
            state: state.clone(),
            deferred: Some(event.clone()),
        };
    }
    let label = event.event.label();
    let commands = match matrix.catalog().index_of(&event.event) {
        Some(col) => matrix
            .loads_to_shed(col)
            .into_iter()
            .filter(|id| live.load_closed(id))
            .map(|id| TripCommand {
                load: id.clone(),
                issued_at: event.timestamp,
                event: label.clone(),
            })
            .collect(),
        None => Vec::new(),
    };
    ActOutcome {
        commands,
        state: EngineState {
            mode: Mode::Inhibited {
                until: event.timestamp + settle_time,
            },
            matrix: state.matrix.clone(),
        },
        deferred: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutcome {
    pub state: EngineState,
    /// The engine re-armed and needs a freshly computed matrix.
    pub matrix_requested: bool,
}

pub fn tick(state: &EngineState, now: f64) -> TickOutcome {
    match state.mode {
        Mode::Inhibited { until } if now >= until => TickOutcome {
            state: EngineState {
                mode: Mode::Armed,
                matrix: state.matrix.clone(),
            },
            matrix_requested: true,
        },
        _ => TickOutcome {
            state: state.clone(),
            matrix_requested: false,
        },
    }
}

/// Stateful driver around [`detect`], [`act`] and [`tick`] keeping the
/// command log and the events handed to the backup path.
#[derive(Debug, Clone)]
pub struct FastLoop {
    pub settle_time: f64,
    state: EngineState,
    commands: Vec<TripCommand>,
    backup: Vec<DetectedEvent>,
    handled: Vec<DetectedEvent>,
}

impl FastLoop {
    pub fn new(settle_time: f64) -> Self {
        Self {
            settle_time,
            state: EngineState::armed(),
            commands: Vec::new(),
            backup: Vec::new(),
            handled: Vec::new(),
        }
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// Atomically replaces the active matrix.
    pub fn install_matrix(&mut self, matrix: Arc<SheddingMatrix>) {
        self.state.matrix = Some(matrix);
    }

    /// Processes one pair of consecutive snapshots and returns the commands
    /// issued for it.
    pub fn step(
        &mut self,
        config: &GridConfig,
        catalog: &EventCatalog,
        prev: &NetworkSnapshot,
        next: &NetworkSnapshot,
    ) -> Vec<TripCommand> {
        let mut issued = Vec::new();
        for event in detect(config, catalog, prev, next) {
            let outcome = match self.state.matrix.clone() {
                Some(m) => act(&self.state, &event, &m, next, self.settle_time),
                None => {
                    let empty = SheddingMatrix::empty(config, catalog.clone());
                    act(&self.state, &event, &empty, next, self.settle_time)
                }
            };
            self.state = outcome.state;
            match outcome.deferred {
                Some(d) => self.backup.push(d),
                None => self.handled.push(event),
            }
            issued.extend(outcome.commands);
        }
        self.commands.extend(issued.iter().cloned());
        issued
    }

    /// Advances the settle timer; returns true when the engine re-armed.
    pub fn tick(&mut self, now: f64) -> bool {
        let outcome = tick(&self.state, now);
        self.state = outcome.state;
        outcome.matrix_requested
    }

    pub fn command_log(&self) -> &[TripCommand] {
        &self.commands
    }

    /// Events that arrived while inhibited.
    pub fn backup_log(&self) -> &[DetectedEvent] {
        &self.backup
    }

    pub fn handled_events(&self) -> &[DetectedEvent] {
        &self.handled
    }
}
