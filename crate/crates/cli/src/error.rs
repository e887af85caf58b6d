//! Harness errors and their process exit codes.

use std::path::PathBuf;

use thiserror::Error;

/// Exit code for success.
pub const EXIT_OK: u8 = 0;
/// Exit code for IO, parse and configuration failures, and for non-SPD input.
pub const EXIT_INPUT: u8 = 1;
/// Exit code for a violated a-priori bound.
pub const EXIT_BOUND: u8 = 2;
/// Exit code for a run that hit its sweep cap.
pub const EXIT_NONCONVERGENCE: u8 = 3;

/// Everything that makes a command fail. All of these exit with [`EXIT_INPUT`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    ConfigJson { path: PathBuf, source: serde_json::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("not a pivot strategy: {0}")]
    NotPivotStrategy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("input is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("json export failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Solver(String),
}

/// Result alias for the harness.
pub type CliResult<T> = Result<T, CliError>;
