//! Command implementations behind the `ngfiber` binary.
//!
//! Every command is a pure function from its arguments to a [`Table`] or a
//! report, so the binary, the integration tests and the acceptance suite all
//! drive the same code.

pub mod args;
pub mod commands;
pub mod config;
pub mod table;
pub mod validate;

use std::path::PathBuf;

use thiserror::Error;

pub use args::{Cli, Command, Format};
pub use table::{Cell, Table};
pub use validate::{CheckOutcome, Level, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ngfiber_core::Error),
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("validation failed: {}", .0.join(", "))]
    ValidationFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) | CliError::Config { .. } | CliError::Usage(_) => EXIT_PARAMETER,
            CliError::Io { .. } => EXIT_IO,
            CliError::ValidationFailed(_) => EXIT_VALIDATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Run a parsed command line, writing results to `--out` or stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    commands::run(cli)
}
