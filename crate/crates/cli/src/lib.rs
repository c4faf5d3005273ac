//! Standard-library companion to `wsansim-core`: scenario files,
//! CSV/trace emission and the command-line front end's plumbing.

pub mod config;
pub mod exec;
pub mod output;

use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    /// Process exit code: 1 for configuration problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(config::ConfigError::Io { .. }) => 2,
            CliError::Config(_) => 1,
            CliError::Output { .. } => 2,
        }
    }
}
