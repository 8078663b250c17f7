//! Orchestration layer: configuration files, output formats, parallel
//! training and sweeps, timing, and the command implementations behind the
//! `chrom-oed` binary.

pub mod bench;
pub mod commands;
pub mod config;
pub mod io;
pub mod persist;
pub mod sweep;
pub mod train;

use std::fmt;

/// Failure classes mapped onto process exit codes: configuration problems
/// exit with 2, runtime (numerical or I/O) failures with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<chrom_oed_core::Error> for CliError {
    fn from(e: chrom_oed_core::Error) -> Self {
        match e {
            chrom_oed_core::Error::InvalidConfig(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("json: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
