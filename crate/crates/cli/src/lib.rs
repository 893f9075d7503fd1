//! Configuration, experiment drivers and file output for the `alphaflow` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
pub use error::CliError;
