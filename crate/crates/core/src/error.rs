use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by waveform handling, estimation and relay simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("waveform needs at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("traces are not aligned: {left} vs {right} samples")]
    Misaligned { left: usize, right: usize },

    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),

    #[error("row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("time went backwards: {previous} s followed by {current} s")]
    NonMonotoneTime { previous: f64, current: f64 },

    #[error("rate trace must be in {expected}, got {got}")]
    WrongUnit { expected: &'static str, got: &'static str },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

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

/// Rejects NaN and infinities with a message naming the offending parameter.
pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {value}")))
    }
}
