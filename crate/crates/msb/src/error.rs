use std::path::PathBuf;

pub type Result<T, E = MsbError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum MsbError {
    /// Bad invocation or configuration; exit code 1.
    #[error("usage: {0}")]
    Usage(String),
    /// Malformed or inconsistent input data; exit code 2.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] msb_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl MsbError {
    pub fn exit_code(&self) -> i32 {
        match self {
            MsbError::Usage(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| MsbError::Io { path, source }
    }
}
