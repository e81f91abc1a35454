//! The reference plant shipped in `fixtures/`: three busbars, two busties,
//! four 25 MW units in two buildings, ten loads and a grid tie.
//!
//! `TRIP_SCENARIO` runs the plant islanded on two units at 11 MW each and
//! trips G2 at 2 s with a 200 ms shedding delay.

use crate::dynamics::SimScenario;
use crate::grid_model::NetworkSnapshot;
use crate::io::{parse_config, parse_scenario, parse_snapshot, LoadedConfig};

pub const CONFIG: &str = include_str!("../fixtures/platform.toml");
pub const TRIP_SCENARIO: &str = include_str!("../fixtures/trip_g2.toml");
pub const SNAPSHOT: &str = include_str!("../fixtures/snapshot.toml");

pub fn config() -> LoadedConfig {
    parse_config(CONFIG, "fixtures/platform.toml").expect("reference configuration parses")
}

pub fn trip_scenario(config: &LoadedConfig) -> SimScenario {
    parse_scenario(TRIP_SCENARIO, config, "fixtures/trip_g2.toml")
        .expect("reference scenario parses")
}

pub fn snapshot(config: &LoadedConfig) -> NetworkSnapshot {
    parse_snapshot(SNAPSHOT, &config.grid, "fixtures/snapshot.toml")
        .expect("reference snapshot parses")
}
