//! File formats, reports and the command-line driver for `netsig-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
