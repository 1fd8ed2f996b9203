use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad configuration or input syntax; exit status 2.
    #[error("{0}")]
    Config(String),
    /// The computation itself failed; exit status 1.
    #[error("{0}")]
    Domain(#[from] renorm_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Domain(_) => 1,
            LabError::Config(_) | LabError::Io { .. } => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
