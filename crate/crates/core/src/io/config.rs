use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{check_version, from_toml, invalid, read_text, IoError};
use crate::dynamics::{FlsParams, GovernorParams, Plant};
use crate::grid_model::{
    validate_config, Busbar, Bustie, ExternalTie, Generator, GeneratorId, GridConfig, Load, SrCurve,
};
use crate::lse::LsePeriod;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    format_version: u32,
    nominal_frequency_hz: f64,
    #[serde(default)]
    fls: FlsSection,
    busbars: Vec<BusbarEntry>,
    #[serde(default)]
    busties: Vec<BustieEntry>,
    #[serde(default)]
    generators: Vec<GeneratorEntry>,
    #[serde(default)]
    loads: Vec<LoadEntry>,
    external_tie: Option<TieEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FlsSection {
    lse_period_s: f64,
    total_delay_s: f64,
    settle_time_s: f64,
    uf_threshold_hz: f64,
    relay_pickup_delay_s: f64,
}

impl Default for FlsSection {
    fn default() -> Self {
        let s = FlsSettings::default();
        Self {
            lse_period_s: s.lse_period.seconds(),
            total_delay_s: s.total_delay,
            settle_time_s: s.settle_time,
            uf_threshold_hz: s.uf_threshold,
            relay_pickup_delay_s: s.relay_pickup_delay,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusbarEntry {
    id: String,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BustieEntry {
    id: String,
    from: String,
    to: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    id: String,
    busbar: String,
    building: String,
    rated_power_mw: f64,
    rated_apparent_power_mva: f64,
    inertia_constant_s: f64,
    /// [output MW, reserve MW] breakpoints
    #[serde(default)]
    sr_curve_mw: Vec<[f64; 2]>,
    governor: Option<GovernorEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GovernorEntry {
    droop_pu: f64,
    t_gov_s: f64,
    t_turb_s: f64,
    p_max_mw: f64,
    p_min_mw: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadEntry {
    id: String,
    busbar: String,
    priority: u32,
    #[serde(default = "default_true")]
    sheddable: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TieEntry {
    id: String,
    busbar: String,
    #[serde(default = "default_true")]
    present: bool,
}

/// Shedding and protection settings from the `[fls]` section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlsSettings {
    pub lse_period: LsePeriod,
    /// Event to load-breaker opening, s.
    pub total_delay: f64,
    /// s
    pub settle_time: f64,
    /// Hz
    pub uf_threshold: f64,
    /// s
    pub relay_pickup_delay: f64,
}

impl Default for FlsSettings {
    fn default() -> Self {
        Self {
            lse_period: LsePeriod::default(),
            total_delay: 0.2,
            settle_time: crate::edsa::DEFAULT_SETTLE_TIME,
            uf_threshold: 48.0,
            relay_pickup_delay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub grid: GridConfig,
    pub governors: BTreeMap<GeneratorId, GovernorParams>,
    pub fls: FlsSettings,
}

impl LoadedConfig {
    pub fn plant(&self) -> Plant {
        Plant {
            config: self.grid.clone(),
            governors: self.governors.clone(),
        }
    }

    pub fn fls_params(&self, shedding_enabled: bool) -> FlsParams {
        FlsParams {
            shedding_enabled,
            lse_period: self.fls.lse_period,
            settle_time: self.fls.settle_time,
        }
    }
}

/// Parses and validates a configuration document. `origin` names the source
/// in diagnostics.
pub fn parse_config(text: &str, origin: &str) -> Result<LoadedConfig, IoError> {
    let file: ConfigFile = from_toml(text, origin)?;
    check_version(file.format_version, origin)?;

    let lse_period = LsePeriod::new(file.fls.lse_period_s)
        .map_err(|m| invalid(origin, format!("fls.lse_period_s: {m}")))?;
    let fls = FlsSettings {
        lse_period,
        total_delay: file.fls.total_delay_s,
        settle_time: file.fls.settle_time_s,
        uf_threshold: file.fls.uf_threshold_hz,
        relay_pickup_delay: file.fls.relay_pickup_delay_s,
    };
    if !(fls.total_delay >= 0.0) {
        return Err(invalid(origin, "fls.total_delay_s: must be >= 0"));
    }
    if !(fls.settle_time >= 0.0) {
        return Err(invalid(origin, "fls.settle_time_s: must be >= 0"));
    }

    let mut governors = BTreeMap::new();
    let mut generators = Vec::new();
    for (i, g) in file.generators.into_iter().enumerate() {
        if let Some(gov) = g.governor {
            let params = GovernorParams {
                droop: gov.droop_pu,
                t_gov: gov.t_gov_s,
                t_turb: gov.t_turb_s,
                p_max: gov.p_max_mw,
                p_min: gov.p_min_mw,
            };
            params
                .check()
                .map_err(|m| invalid(origin, format!("generators[{i}].governor: {m}")))?;
            governors.insert(GeneratorId::from(g.id.clone()), params);
        }
        generators.push(Generator {
            id: g.id.into(),
            busbar: g.busbar.into(),
            building: g.building.into(),
            rated_power: g.rated_power_mw,
            rated_apparent_power: g.rated_apparent_power_mva,
            inertia_constant: g.inertia_constant_s,
            sr_curve: SrCurve(g.sr_curve_mw.into_iter().map(|[p, sr]| (p, sr)).collect()),
        });
    }

    let grid = GridConfig {
        busbars: file
            .busbars
            .into_iter()
            .map(|b| Busbar {
                name: b.name.unwrap_or_else(|| b.id.clone()),
                id: b.id.into(),
            })
            .collect(),
        busties: file
            .busties
            .into_iter()
            .map(|t| Bustie {
                id: t.id.into(),
                endpoints: (t.from.into(), t.to.into()),
            })
            .collect(),
        generators,
        loads: file
            .loads
            .into_iter()
            .map(|l| Load {
                id: l.id.into(),
                busbar: l.busbar.into(),
                priority: l.priority,
                sheddable: l.sheddable,
            })
            .collect(),
        external_tie: file.external_tie.map(|t| ExternalTie {
            id: t.id.into(),
            busbar: t.busbar.into(),
            present: t.present,
        }),
        nominal_frequency: file.nominal_frequency_hz,
    };

    let report = validate_config(&grid);
    if !report.is_valid() {
        return Err(IoError::Validation {
            origin: origin.to_owned(),
            findings: report.findings.iter().map(|f| f.to_string()).collect(),
        });
    }
    Ok(LoadedConfig {
        grid,
        governors,
        fls,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, IoError> {
    parse_config(&read_text(path)?, &path.display().to_string())
}
