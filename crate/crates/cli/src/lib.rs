//! Command-line front end for `heom-core`: TOML configuration, run
//! orchestration, and CSV output with a self-describing header.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use run::{execute, parse_values, run, Command, RunSpec};
