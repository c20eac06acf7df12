//! Scenario configuration, figure sweeps, CSV output and the validation suite.

pub mod config;
pub mod csv;
pub mod sweep;
pub mod validate;

pub use config::{load_scenario, CouplingMode, Preset, ScenarioConfig, ScenarioFile, SweepKind, SweepSpec};
pub use sweep::{emit, run_fig1a, run_fig1b, run_fig2, run_fig3, run_sweep, SweepResult};
pub use validate::{validate, ValidateOptions, ValidationReport};
