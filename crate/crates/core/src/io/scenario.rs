use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{check_version, from_toml, invalid, read_text, IoError, LoadedConfig};
use crate::dynamics::{ScriptedEvent, SimScenario, SrSetting, DEFAULT_DT};
use crate::grid_model::Event;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format_version: u32,
    duration_s: f64,
    step_s: Option<f64>,
    #[serde(default)]
    imported_power_mw: f64,
    #[serde(default)]
    tie_closed: bool,
    #[serde(default)]
    open_busties: Vec<String>,
    /// Constant reserve per connected generator; omitted means the curves.
    sr_parameter_mw: Option<f64>,
    total_delay_s: Option<f64>,
    uf_threshold_hz: Option<f64>,
    relay_pickup_delay_s: Option<f64>,
    #[serde(default)]
    dispatch: Vec<DispatchEntry>,
    #[serde(default)]
    loads: Vec<LoadEntry>,
    #[serde(default)]
    events: Vec<EventEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DispatchEntry {
    generator: String,
    power_mw: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadEntry {
    id: String,
    power_mw: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventEntry {
    time_s: f64,
    /// e.g. "TRIP:G2"
    event: String,
}

/// Parses a simulation scenario. Settings not given fall back to the
/// configuration's `[fls]` section. Physical consistency (balance, ids,
/// governor ranges) is checked when the scenario is run.
pub fn parse_scenario(
    text: &str,
    config: &LoadedConfig,
    origin: &str,
) -> Result<SimScenario, IoError> {
    let file: ScenarioFile = from_toml(text, origin)?;
    check_version(file.format_version, origin)?;

    let mut dispatch = BTreeMap::new();
    for d in file.dispatch {
        if dispatch
            .insert(d.generator.clone().into(), d.power_mw)
            .is_some()
        {
            return Err(invalid(
                origin,
                format!("generator '{}' dispatched twice", d.generator),
            ));
        }
    }
    let mut loads = BTreeMap::new();
    for l in file.loads {
        if loads.insert(l.id.clone().into(), l.power_mw).is_some() {
            return Err(invalid(origin, format!("load '{}' listed twice", l.id)));
        }
    }
    let mut events = Vec::with_capacity(file.events.len());
    for (i, e) in file.events.into_iter().enumerate() {
        let event = Event::parse_label(&e.event).ok_or_else(|| {
            invalid(
                origin,
                format!("events[{i}]: cannot parse event label '{}'", e.event),
            )
        })?;
        events.push(ScriptedEvent {
            time: e.time_s,
            event,
        });
    }

    Ok(SimScenario {
        dispatch,
        loads,
        open_busties: file.open_busties.into_iter().map(Into::into).collect(),
        tie_closed: file.tie_closed,
        imported_power: file.imported_power_mw,
        events,
        total_delay: file.total_delay_s.unwrap_or(config.fls.total_delay),
        sr: file
            .sr_parameter_mw
            .map_or(SrSetting::Curve, SrSetting::Constant),
        uf_threshold: file.uf_threshold_hz.unwrap_or(config.fls.uf_threshold),
        relay_pickup_delay: file
            .relay_pickup_delay_s
            .unwrap_or(config.fls.relay_pickup_delay),
        duration: file.duration_s,
        dt: file.step_s.unwrap_or(DEFAULT_DT),
    })
}

pub fn load_scenario(path: &Path, config: &LoadedConfig) -> Result<SimScenario, IoError> {
    parse_scenario(&read_text(path)?, config, &path.display().to_string())
}
