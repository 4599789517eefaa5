use std::fmt::Display;
use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {message}")]
    Numerical { context: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 0 success, 1 check failure, 2 config or file error, 3 numerical error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ChecksFailed { .. } => 1,
            Error::Config(_) | Error::Io { .. } => 2,
            Error::Numerical { .. } => 3,
        }
    }
}

/// Wraps a library error with the experiment or operator it came from.
pub fn numerical<E: Display>(context: impl Into<String>) -> impl FnOnce(E) -> Error {
    let context = context.into();
    move |e| Error::Numerical { context, message: e.to_string() }
}
