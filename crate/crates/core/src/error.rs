use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("missing required channel `{0}`")]
    MissingChannel(&'static str),

    #[error("reference channel required: recording has no `abp` column")]
    MissingReference,

    #[error(
        "unknown sampling rate for {0}: no override, no sidecar metadata and no usable time column"
    )]
    UnknownSamplingRate(PathBuf),

    #[error("non-finite sample at row {row} (column `{column}`)")]
    NonFinite { row: usize, column: String },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("malformed value at row {row}, column `{column}`: {value:?}")]
    Malformed {
        row: usize,
        column: String,
        value: String,
    },

    #[error("channel length mismatch: `{channel}` has {found} samples, expected {expected}")]
    ChannelMismatch {
        channel: String,
        expected: usize,
        found: usize,
    },

    #[error("too few extrema for envelope construction ({maxima} maxima, {minima} minima)")]
    TooFewExtrema { maxima: usize, minima: usize },

    #[error("empty envelope: thresholded envelope is identically zero")]
    EmptyEnvelope,

    #[error("no cardiac cycle envelope peaks found")]
    NoCcePeaks,

    #[error("no cardiac structure: {0}")]
    NoCardiacStructure(String),

    #[error("too few peaks: need at least {needed}, got {found}")]
    TooFewPeaks { needed: usize, found: usize },

    #[error("peak indices not strictly increasing ({0} followed by {1})")]
    NonIncreasing(usize, usize),

    #[error("singular system: design matrix is rank deficient (condition estimate {0:.3e})")]
    Singular(f64),

    #[error("length mismatch: {left} estimates vs {right} references")]
    LengthMismatch { left: usize, right: usize },

    #[error("statistic undefined: {0}")]
    Undefined(&'static str),

    #[error("calibration split leaves {train} training beats; at least 3 are required")]
    SplitTooSmall { train: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
