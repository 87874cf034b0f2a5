//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A brute-force enumeration would exceed the configured size cap.
    #[error("enumeration size limit exceeded: {0}")]
    SizeLimit(String),

    /// A required parameter was not supplied.
    #[error("missing parameter: {0}")]
    MissingParameter(String),

    /// A traced-out marginal depends on the traced party's setting.
    #[error("inconsistent marginal: {0}")]
    InconsistentMarginal(String),

    /// Readout calibration bounds leave no usable signal range.
    #[error("degenerate readout calibration: {0}")]
    DegenerateCalibration(String),

    /// Malformed JSON, NDJSON, or CSV input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
