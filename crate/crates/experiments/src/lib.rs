//! Scenario runner for the pathwise solvers: TOML configurations, per-seed
//! runs with manifests, the analysis battery and convergence tables.

// `!(x > a)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod config;
pub mod error;
pub mod manifest;
pub mod scenarios;
pub mod table;
pub mod traces;

pub use config::{parse_config, ConfigError, ScenarioConfig, ScenarioId};
pub use error::{ExperimentError, Result};
pub use manifest::{RunManifest, RunRecord, MANIFEST_FILE};
pub use scenarios::{run_battery, run_scenario};
pub use table::{convergence_table, write_table_csv, TableRow};
