//! Front end for `qcv`: configuration, operator specs, commands and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod opspec;
pub mod output;

pub use commands::{run, Report};
pub use config::Config;
pub use error::{CliError, Result};
