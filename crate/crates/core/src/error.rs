//! Error type shared across the pipeline.

use std::io;

use thiserror::Error;

/// Errors produced by the detection pipeline and its file interfaces.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or malformed configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed line in an input file (flow CSV, config).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Violation of the monitor/collector wire contract (mismatched series
    /// lengths, malformed report records).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Random generation could not satisfy its constraints.
    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
