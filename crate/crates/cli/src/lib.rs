//! Command-line driver: configuration, file formats and the pipeline
//! subcommands.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pgm;

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
