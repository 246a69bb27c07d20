//! Command-line front end: configuration, sweeps and table output.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::run;
pub use config::{Command, RunConfig, Settings};
pub use error::{CliError, Result};
pub use table::{Cell, ResultTable};
