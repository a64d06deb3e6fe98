use thiserror::Error;

/// Failures surfaced by the `domino` binary, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration conflict: {0}")]
    Conflict(String),
    #[error("{0} suite(s) failed")]
    SuiteFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SuiteFailed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Conflict(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

/// Malformed values are parse errors; everything else the core rejects is a
/// conflict between otherwise well-formed settings.
impl From<domino_core::Error> for CliError {
    fn from(e: domino_core::Error) -> Self {
        use domino_core::Error as E;
        match e {
            E::InvalidEvidence(_) | E::Io(_) | E::EmptyInput | E::InvalidRho { .. } => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Conflict(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
