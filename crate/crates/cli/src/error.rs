use thiserror::Error;

use ising_core::bootstrap::BootstrapError;
use ising_core::coupling::CouplingError;
use ising_core::mptest::MpTestError;
use ising_core::partition::PartitionError;

/// Process exit code for usage and file-parse errors.
pub const EXIT_USAGE: i32 = 2;
/// Process exit code for numeric-domain errors.
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }

    pub fn io(path: &str, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Attach a file path to a coupling error (parse errors keep their line).
    pub fn from_coupling(path: &str, e: CouplingError) -> Self {
        match e {
            CouplingError::Parse { line, message } => CliError::Parse {
                path: path.to_string(),
                line,
                message,
            },
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<CouplingError> for CliError {
    fn from(e: CouplingError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<MpTestError> for CliError {
    fn from(e: MpTestError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<PartitionError> for CliError {
    fn from(e: PartitionError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<BootstrapError> for CliError {
    fn from(e: BootstrapError) -> Self {
        CliError::Domain(e.to_string())
    }
}
