//! File formats, the small-instance suite and the scaling experiment on top
//! of [`lapbound_core`]. The `lapbound` binary wraps these as subcommands.

pub mod error;
pub mod experiment;
pub mod io;
pub mod suite;

pub use error::{exit, AppError, Result};
pub use experiment::{emit_report, run_experiment, ExperimentConfig, ExperimentResults, GraphSource, ResultRow};
