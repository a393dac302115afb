//! Command-line front end for gazekit: dataset ingestion, model files,
//! evaluation reports.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod model_file;
pub mod report;

pub use commands::{cmd_classify, cmd_evaluate, cmd_synth, cmd_train};
pub use config::{RunArgs, RunConfig};
pub use error::{CliError, CliResult, ErrorKind};
