//! Configuration, orchestration, results tables and reproducibility
//! manifests for the `dklab` command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod table;

pub use cli::run_cli;
pub use config::{Experiment, FileConfig, Overrides, RunConfig};
pub use error::{exit, CliError, Result};
pub use manifest::{replay, run_and_record, RunManifest};
