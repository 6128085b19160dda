//! File I/O and subcommands of the `gammaexp` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, Result};
