use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    /// 2 for usage and validation problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) | LabError::Validation(_) => 2,
            LabError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}

impl From<eehc_core::Error> for LabError {
    fn from(e: eehc_core::Error) -> Self {
        LabError::Validation(e.to_string())
    }
}
