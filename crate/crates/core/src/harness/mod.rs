//! Simulation driver, error norms, convergence studies and diagnostics.

mod csv;
mod entropy;
mod experiment;
mod presets;
mod run;
mod study;

pub use csv::{comparison_csv, monitor_csv, report_csv, run_summary, snapshot_csv, write_atomic};
pub use entropy::{entropy_residual, entropy_residuals};
pub use experiment::{Experiment, InitialSpec, StepRatio};
pub use presets::{Preset, PresetKind};
pub use run::{
    l1_error, observed_rate, restrict_to_coarse, run_simulation, run_with, MonitorEntry, MonitorLog, RunResult,
    Simulation,
};
pub use study::{
    compare, convergence_study, error_to_reference, Comparison, ConvergenceReport, ConvergenceRow, ReferenceCache,
};
