use std::path::PathBuf;

use pseudospec::ErrorClass;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{command}: parameter `{key}`: {reason}")]
    Param {
        command: &'static str,
        key: String,
        reason: String,
    },

    #[error("{command}: {source}")]
    Op {
        command: &'static str,
        #[source]
        source: pseudospec::Error,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Param { .. } | CliError::Read { .. } | CliError::Json { .. } => EXIT_INPUT,
            CliError::Op { source, .. } => match source.class() {
                ErrorClass::Input => EXIT_INPUT,
                ErrorClass::Budget => EXIT_BUDGET,
                ErrorClass::Internal => EXIT_INTERNAL,
            },
            CliError::Write { .. } | CliError::Serialize(_) => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
