use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use curvesmith::curve_model::CurveDescriptor;
use curvesmith::Config;

use crate::error::CliError;

pub const SCHEMA: &str = "curvesmith/1";

/// Truncation levels in force for a run.
#[derive(Debug, Serialize)]
pub struct TruncationLevels {
    /// Depth of the descriptor's own construction, when it has one.
    pub construction_depth: Option<usize>,
    pub cantor_depth: usize,
    pub harmonic_depth: usize,
    pub max_cells: usize,
}

/// Common header of every JSON document the CLI writes.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub descriptor: &'a CurveDescriptor,
    pub truncation: TruncationLevels,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'static str, descriptor: &'a CurveDescriptor, cfg: &Config, body: T) -> Self {
        Self {
            schema: SCHEMA,
            command,
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            descriptor,
            truncation: TruncationLevels {
                construction_depth: descriptor.truncation_depth(),
                cantor_depth: cfg.cantor_depth,
                harmonic_depth: cfg.harmonic_depth,
                max_cells: cfg.max_cells,
            },
            body,
        }
    }
}

/// SHA-256 of the config's canonical JSON (fields in declaration order).
pub fn config_hash(cfg: &Config) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_config_changes() {
        let a = Config::default();
        let b = Config { seed: 1, ..Config::default() };
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn envelope_carries_schema_and_depth() {
        let d = CurveDescriptor::CantorPhase { ratio: 0.6, depth: 5 };
        let cfg = Config::default();
        let v: serde_json::Value = serde_json::from_str(&to_json(&Envelope::new("x", &d, &cfg, ()))).unwrap();
        assert_eq!(v["schema"], "curvesmith/1");
        assert_eq!(v["truncation"]["construction_depth"], 5);
        assert_eq!(v["descriptor"]["kind"], "cantor_phase");
    }
}
