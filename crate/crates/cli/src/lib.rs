//! Command-line front end: configuration, dispatch and report writers.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, Cli, ConfigError, RunConfig};
pub use report::ReportEnvelope;
pub use run::{run, CliError, Outcome};
