//! Scenario configuration, Monte-Carlo sweeps, CSV output and self-checks.

pub mod config;
pub mod csv;
pub mod run;
pub mod validate;

pub use config::{ScenarioConfig, SweepAxis, UncertaintyConfig};
pub use run::{run_scenario, run_sweep, ScenarioRun, SweepResult, SweepRow};
pub use validate::{validate, ValidationReport, ValidationSuite};
