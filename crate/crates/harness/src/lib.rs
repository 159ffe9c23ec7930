//! Command-line driver for `sie-core`: run configuration, binary containers, CSV
//! artifacts, parallel path execution and the `selfcheck` invariant table.

pub mod config;
pub mod formats;
pub mod output;
pub mod run;
pub mod selfcheck;

pub use config::{ConfigError, Mode, RunConfig};
pub use run::{run, run_study, Outcome, RunError};
