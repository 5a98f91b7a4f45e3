//! Scenario runner and figure reproduction for the `talbot` library.
//!
//! Scenario files are JSON documents validated against a fixed schema (see
//! [`scenario::ScenarioFile`]); every run writes `trace.csv`,
//! `snapshots.csv`, `bands.csv`, `singularities.csv` and `summary.json`.

pub mod error;
pub mod loop_design;
pub mod output;
pub mod run;
pub mod scenario;
pub mod spectrum;

pub use error::{CliError, CliResult};
