use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("I/O error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Payload ended before the header-declared element count was read.
    #[error("I/O error: truncated payload at byte offset {offset} (needed {needed} more bytes)")]
    Truncated { offset: u64, needed: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("PLY schema error: missing vertex property `{0}`")]
    MissingField(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("image encoding error: {0}")]
    Image(#[from] image::ImageError),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io_at(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoPath {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool: 2 config/parameter,
    /// 3 I/O and file formats, 4 invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) => 2,
            Error::Json(e) if !e.is_io() => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
