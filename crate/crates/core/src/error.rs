use std::path::PathBuf;

/// Errors produced across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("read time {t_now}s precedes programming time {t_programmed}s plus t0")]
    TimeOrder { t_now: f64, t_programmed: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite score at frame {frame}")]
    NonFinite { frame: usize },

    #[error("invalid base `{0}` (expected one of A, C, G, T)")]
    InvalidBase(char),

    #[error("layer {layer} ({name}) needs {rows}x{cols} cells but capacity is exceeded")]
    CapacityExceeded {
        layer: usize,
        name: String,
        rows: usize,
        cols: usize,
    },

    #[error("no route from node {from} to node {to}")]
    NoRoute { from: usize, to: usize },

    #[error("channel {channel} overflow: {requested} bytes requested, {free} bytes free")]
    BufferOverflow {
        channel: usize,
        requested: usize,
        free: usize,
    },

    #[error("channel {0} out of range")]
    BadChannel(usize),

    #[error("invalid mapping: {0}")]
    Mapping(String),

    #[error("malformed {kind} file {path}: {reason}")]
    Format {
        kind: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
