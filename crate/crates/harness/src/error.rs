use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad configuration, detected before any evaluation.
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

impl From<gapbo::Error> for HarnessError {
    fn from(e: gapbo::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
