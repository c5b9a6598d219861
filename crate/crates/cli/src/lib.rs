//! Configuration, commands and file emission for the `sphere-edgelab` binary.

pub mod cache;
pub mod commands;
pub mod config;

use thiserror::Error;

pub use commands::{run, Command, Outcome, RunOptions};
pub use config::{Resolved, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sphere_edgelab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for violated preconditions, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use sphere_edgelab_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Validation(_) | E::Parse(_)) => 2,
            CliError::Core(E::Precondition(_) | E::Domain(_)) => 3,
            CliError::Core(E::Io(_) | E::Json(_)) | CliError::Io(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}
