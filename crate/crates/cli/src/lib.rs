//! Command-line front end: run configuration, checkpoints and the
//! train / sample / evaluate pipeline behind the `dmol` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use pipeline::{fit, generate, score, Checkpoint};
