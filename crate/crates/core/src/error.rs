use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for the decoding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of its documented range.
    #[error("invalid parameter `{name}`: {detail}")]
    Parameter { name: &'static str, detail: String },

    /// A session failed structural validation (lengths, labels, segment layout).
    #[error("session `{session}`: {detail}")]
    Ingestion { session: String, detail: String },

    /// A CSV file could not be parsed; `row` is the 1-based line number.
    #[error("{path}:{row}: {detail}", path = path.display())]
    Csv {
        path: PathBuf,
        row: usize,
        detail: String,
    },

    /// The dataset manifest is missing, malformed, or inconsistent.
    #[error("manifest {path}: {detail}", path = path.display())]
    Manifest { path: PathBuf, detail: String },

    /// Model fitting failed (degenerate class counts, non-SPD covariance).
    #[error("training failed: {0}")]
    Training(String),

    /// Correlation pruning removed every feature of one channel.
    #[error("feature pruning dropped all {channel} columns; lower the threshold")]
    EmptyChannelMask { channel: &'static str },

    /// An internal numeric contract was violated (dimension mismatch, bad simplex row).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
