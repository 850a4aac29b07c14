use std::io;
use std::path::PathBuf;

use metric_entropy::Error as CoreError;
use thiserror::Error;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExitStatus(pub i32);

impl ExitStatus {
    pub const OK: ExitStatus = ExitStatus(0);
    /// A verification check or a net audit failed.
    pub const CHECK_FAILED: ExitStatus = ExitStatus(1);
    pub const MALFORMED_INPUT: ExitStatus = ExitStatus(2);
    pub const UNSUPPORTED: ExitStatus = ExitStatus(3);
    pub const INVALID_PARAMETER: ExitStatus = ExitStatus(4);
    pub const NUMERIC: ExitStatus = ExitStatus(5);
    pub const TOO_LARGE: ExitStatus = ExitStatus(6);
    pub const IO: ExitStatus = ExitStatus(7);
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Param(String),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Core(e) => match e {
                CoreError::Input(_) => ExitStatus::MALFORMED_INPUT,
                CoreError::UnsupportedInvariant(_) | CoreError::UnsupportedCheck(_) => ExitStatus::UNSUPPORTED,
                CoreError::InvalidParameter(_)
                | CoreError::DimensionMismatch { .. }
                | CoreError::InvalidSubgroup(_)
                | CoreError::NotInGroup(_)
                | CoreError::NotInAlgebra(_) => ExitStatus::INVALID_PARAMETER,
                CoreError::Numeric { .. } | CoreError::NotNormal { .. } | CoreError::BranchAmbiguity(_) => {
                    ExitStatus::NUMERIC
                }
                CoreError::TooLarge { .. } => ExitStatus::TOO_LARGE,
            },
            CliError::Input(_) => ExitStatus::MALFORMED_INPUT,
            CliError::Param(_) => ExitStatus::INVALID_PARAMETER,
            CliError::Io { .. } => ExitStatus::IO,
        }
    }

    /// Short machine-readable tag printed with the message.
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Core(CoreError::UnsupportedInvariant(_)) => "unsupported-invariant",
            CliError::Core(CoreError::UnsupportedCheck(_)) => "unsupported-check",
            _ => match self.status() {
                ExitStatus::MALFORMED_INPUT => "malformed-input",
                ExitStatus::INVALID_PARAMETER => "invalid-parameter",
                ExitStatus::NUMERIC => "numeric",
                ExitStatus::TOO_LARGE => "too-large",
                ExitStatus::IO => "io",
                _ => "error",
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
