use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Outcome of one (scenario, seed) run. Paths are relative to the scenario
/// output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub dir: String,
    pub flags: BTreeMap<String, bool>,
    pub constants: BTreeMap<String, Option<f64>>,
    pub files: Vec<String>,
    pub passed: bool,
}

impl RunRecord {
    pub fn new(seed: u64, dir: String) -> Self {
        Self {
            seed,
            dir,
            flags: BTreeMap::new(),
            constants: BTreeMap::new(),
            files: Vec::new(),
            passed: false,
        }
    }

    pub fn flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.to_string(), value);
    }

    /// Non-finite values are stored as `null`.
    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants
            .insert(name.to_string(), value.is_finite().then_some(value));
    }

    pub fn finish(&mut self) {
        self.passed = self.flags.values().all(|v| *v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub title: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub timestamp_unix: u64,
    pub runs: Vec<RunRecord>,
    /// Scenario-wide audits (refinement studies and the like).
    pub scenario_flags: BTreeMap<String, bool>,
    pub scenario_constants: BTreeMap<String, Option<f64>>,
    pub scenario_files: Vec<String>,
    pub passed: bool,
}

impl RunManifest {
    pub fn versions() -> BTreeMap<String, String> {
        BTreeMap::from([
            ("pathwise-core".to_string(), pathwise_core::VERSION.to_string()),
            (
                "pathwise-experiments".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
        ])
    }

    pub fn finish(&mut self) {
        self.passed = self.runs.iter().all(|r| r.passed) && self.scenario_flags.values().all(|v| *v);
    }

    /// Every file the manifest lists, relative to its directory.
    pub fn all_files(&self) -> impl Iterator<Item = &str> {
        self.scenario_files
            .iter()
            .chain(self.runs.iter().flat_map(|r| &r.files))
            .map(String::as_str)
    }

    /// The manifest as JSON without the timestamp, for determinism checks.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timestamp_unix");
        }
        v
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(
            dir.join(MANIFEST_FILE),
        )?)?)
    }
}
