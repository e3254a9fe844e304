//! Command-line front end: JSON run configs, task orchestration and result
//! files.

pub mod config;
pub mod error;
pub mod run;

pub use config::{RunConfig, Task};
pub use error::CliError;
pub use run::{compare_with_oracle, execute, run, OracleReport, Overrides, RunOutput};
