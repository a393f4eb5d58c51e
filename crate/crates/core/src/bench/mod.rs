//! Reproducible experiment runner behind the `qrelay-bench` binary.

pub mod config;
pub mod plot;
pub mod scenarios;

pub use config::{BackendChoice, BenchConfig, WindowConfig};
pub use scenarios::{exit_code, run_scenario, RunSummary, Scenario};
