use thiserror::Error;

/// Errors shared by the library modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("not a total derivative")]
    NotExact,
    #[error("unstable correlator: {0}")]
    Unstable(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
