//! Command-line front end: instance documents, the subcommands, and their
//! exit codes.

pub mod commands;
pub mod document;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::Infeasible(_) => 2,
            Self::Resource(_) => 3,
            Self::Mismatch(_) => 4,
        }
    }
}

impl From<hmsched_core::Error> for CliError {
    fn from(e: hmsched_core::Error) -> Self {
        match e {
            hmsched_core::Error::Resource(msg) => Self::Resource(msg),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}
