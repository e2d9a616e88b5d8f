//! Experiment harness: sweep plans, replication management, deterministic
//! CSV emission and state dumps.

pub mod dump;
pub mod plan;
pub mod report;
pub mod runner;

pub use plan::{Algorithm, ExperimentPlan, Sweep, SweepAxis};
pub use runner::{run, summarize, CellMetrics, CellResult, RunOutput};
