//! Configuration parsing and result files for the `nlwave` tool.

pub mod config;
pub mod error;
pub mod output;

pub use config::{parse_config, ExperimentSettings, RunConfig};
pub use error::CliError;
pub use output::{config_hash, RunManifest};
