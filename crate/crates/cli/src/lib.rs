//! Command-line front end: configuration parsing and stage dispatch.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, Mode, RunConfig};
pub use run::{run_all, RunError, RunSummary, Status};
