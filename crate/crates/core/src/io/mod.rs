//! Configuration, snapshot and scenario documents, and CSV output.
//!
//! Documents are TOML (snapshots may also be JSON, chosen by extension).
//! Every document carries `format_version`; unknown keys are rejected; keys
//! carry their unit as a suffix (`_mw`, `_mva`, `_s`, `_hz`, `_pu`).

mod config;
pub mod csv;
mod scenario;
mod snapshot;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{load_config, parse_config, FlsSettings, LoadedConfig};
pub use scenario::{load_scenario, parse_scenario};
pub use snapshot::{load_snapshot, parse_snapshot, parse_snapshot_json};

/// Current version of every document format.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    Version { origin: String, found: u32 },
    #[error("{origin}: {} invalid item(s):\n  {}", findings.len(), findings.join("\n  "))]
    Validation {
        origin: String,
        findings: Vec<String>,
    },
    #[error("{origin}: {message}")]
    Invalid { origin: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<::csv::Error> for IoError {
    fn from(e: ::csv::Error) -> Self {
        IoError::Csv(e.to_string())
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn from_toml<T: serde::de::DeserializeOwned>(
    text: &str,
    origin: &str,
) -> Result<T, IoError> {
    toml::from_str(text).map_err(|e| IoError::Parse {
        origin: origin.to_owned(),
        message: e.to_string().trim_end().to_owned(),
    })
}

pub(crate) fn check_version(found: u32, origin: &str) -> Result<(), IoError> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::Version {
            origin: origin.to_owned(),
            found,
        })
    }
}

pub(crate) fn invalid(origin: &str, message: impl Into<String>) -> IoError {
    IoError::Invalid {
        origin: origin.to_owned(),
        message: message.into(),
    }
}
