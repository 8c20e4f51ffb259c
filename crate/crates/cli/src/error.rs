use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] dts_core::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    /// Process exit code: 2 for bad input, 3 for I/O failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dts_core::Error as E;
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::Core(E::Config(_) | E::InvalidInstance(_) | E::Domain(_)) => 2,
            HarnessError::Core(_) => 1,
        }
    }
}
