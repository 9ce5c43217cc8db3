//! Command-line pipelines over the fitting and photonics crates.

pub mod config;
mod error;
pub mod histogram_io;
pub mod pipeline;
pub mod report;

pub use config::{AnalysisConfig, Task};
pub use error::{CliError, EXIT_CONVERGENCE, EXIT_INPUT, EXIT_NUMERICAL};
pub use pipeline::{run_pipeline, write_outcome, Outcome};
