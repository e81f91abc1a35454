use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use super::{check_version, from_toml, invalid, read_text, IoError};
use crate::grid_model::{
    check_snapshot, BreakerState, GeneratorReading, GridConfig, LoadReading, NetworkSnapshot,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    format_version: u32,
    #[serde(default)]
    timestamp_s: f64,
    #[serde(default)]
    imported_power_mw: f64,
    external_tie_closed: Option<bool>,
    #[serde(default)]
    generators: Vec<GenEntry>,
    #[serde(default)]
    loads: Vec<LoadEntry>,
    #[serde(default)]
    busties: Vec<BustieEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenEntry {
    id: String,
    closed: bool,
    #[serde(default)]
    power_mw: f64,
    /// Defaults to the configured curve at `power_mw`.
    sr_mw: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadEntry {
    id: String,
    closed: bool,
    #[serde(default)]
    power_mw: f64,
    priority: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BustieEntry {
    id: String,
    closed: bool,
}

fn build(
    file: SnapshotFile,
    config: &GridConfig,
    origin: &str,
) -> Result<NetworkSnapshot, IoError> {
    check_version(file.format_version, origin)?;
    let mut seen = BTreeSet::new();
    let mut dup = |kind: &str, id: &str| {
        if seen.insert((kind.to_owned(), id.to_owned())) {
            Ok(())
        } else {
            Err(invalid(origin, format!("duplicate {kind} entry '{id}'")))
        }
    };

    let mut snap = NetworkSnapshot {
        timestamp: file.timestamp_s,
        imported_power: file.imported_power_mw,
        ..Default::default()
    };
    for g in file.generators {
        dup("generator", &g.id)?;
        let Some(cfg) = config.generator(&g.id.as_str().into()) else {
            return Err(invalid(origin, format!("unknown generator '{}'", g.id)));
        };
        let breaker = BreakerState::from_closed(g.closed);
        let sr = match g.sr_mw {
            Some(sr) => sr,
            None if g.closed => cfg.sr_curve.evaluate(g.power_mw),
            None => 0.0,
        };
        snap.generators.insert(
            g.id.into(),
            GeneratorReading {
                breaker,
                power: g.power_mw,
                sr,
            },
        );
    }
    for l in file.loads {
        dup("load", &l.id)?;
        if config.load_index(&l.id.as_str().into()).is_none() {
            return Err(invalid(origin, format!("unknown load '{}'", l.id)));
        }
        snap.loads.insert(
            l.id.into(),
            LoadReading {
                breaker: BreakerState::from_closed(l.closed),
                power: l.power_mw,
                priority: l.priority,
            },
        );
    }
    for t in file.busties {
        dup("bustie", &t.id)?;
        if config.bustie_index(&t.id.as_str().into()).is_none() {
            return Err(invalid(origin, format!("unknown bustie '{}'", t.id)));
        }
        snap.busties
            .insert(t.id.into(), BreakerState::from_closed(t.closed));
    }
    snap.external_tie = match (file.external_tie_closed, config.active_tie()) {
        (Some(c), Some(_)) => Some(BreakerState::from_closed(c)),
        (Some(_), None) => {
            return Err(invalid(
                origin,
                "external_tie_closed given but the configuration has no tie",
            ))
        }
        (None, _) => None,
    };
    check_snapshot(config, &snap).map_err(|e| invalid(origin, e.to_string()))?;
    Ok(snap)
}

pub fn parse_snapshot(
    text: &str,
    config: &GridConfig,
    origin: &str,
) -> Result<NetworkSnapshot, IoError> {
    build(from_toml(text, origin)?, config, origin)
}

pub fn parse_snapshot_json(
    text: &str,
    config: &GridConfig,
    origin: &str,
) -> Result<NetworkSnapshot, IoError> {
    let file = serde_json::from_str(text).map_err(|e| IoError::Parse {
        origin: origin.to_owned(),
        message: e.to_string(),
    })?;
    build(file, config, origin)
}

/// Reads a snapshot; `.json` files are parsed as JSON, anything else as TOML.
pub fn load_snapshot(path: &Path, config: &GridConfig) -> Result<NetworkSnapshot, IoError> {
    let text = read_text(path)?;
    let origin = path.display().to_string();
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        parse_snapshot_json(&text, config, &origin)
    } else {
        parse_snapshot(&text, config, &origin)
    }
}
