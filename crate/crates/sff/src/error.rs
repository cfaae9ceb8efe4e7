use std::path::PathBuf;

/// Failures of the harness, each mapped to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] sff_core::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for failed checks, 4 for I/O and
    /// malformed files, 1 for numerical failures inside a run.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Core(sff_core::Error::InvalidParameter(_) | sff_core::Error::Mismatch(_)) => 2,
            Self::Verification(_) => 3,
            Self::Io { .. } | Self::Format { .. } => 4,
            Self::Core(_) => 1,
        }
    }
}
