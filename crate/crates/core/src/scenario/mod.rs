//! Scenario layer: configuration parsing and validation, the named
//! verification checks, sequenced execution with panic capture, and stable
//! report rendering.
//!
//! A scenario is a TOML description of one model, one run setup, a check
//! list, tolerance overrides, and output options. [`run_scenario`] executes
//! the checks in declared order and returns a [`Report`] whose machine
//! rendering is byte-stable for a fixed configuration and host.

pub mod checks;
pub mod config;
pub mod report;
pub mod runner;

pub use checks::{run_named_check, CHECK_NAMES};
pub use config::{
    default_tolerances, BetaChoice, DumpKind, LapseKind, ModelConfig, OutputConfig, RouteChoice,
    RunConfig, ScenarioConfig,
};
pub use report::{CheckRecord, CheckStatus, Gate, GateKind, Report, ReportFormat};
pub use runner::{render_dump, run_convergence, run_scenario};
