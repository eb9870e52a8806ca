use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end, each mapped to an
/// exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 for numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::MissingData(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<annealga::Error> for CliError {
    fn from(e: annealga::Error) -> Self {
        use annealga::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::UnsupportedOperatorCount(_)
            | E::LengthMismatch { .. }
            | E::TooManyQubits { .. }
            | E::Parse(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
