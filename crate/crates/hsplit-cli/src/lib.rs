//! Scenario runner around the `hsplit` library: JSON configs in,
//! iteration traces and diagnostic summaries out.

#![forbid(unsafe_code)]

pub mod config;
pub mod runner;

pub use config::{build_scenario, load_config, validate_config, CliError, CliResult};
pub use runner::{run_scenario, run_suite, RunOutcome, SolveOptions};
