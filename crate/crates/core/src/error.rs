//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by codecs, the channel harness and parameter derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    /// Invalid argument to an operation (out-of-range length, wrong alphabet, ...).
    #[error("parameter error: {0}")]
    Params(String),

    /// Construction parameters violate a feasibility constraint; the message
    /// names the constraint that failed.
    #[error("feasibility error: {0}")]
    Feasibility(String),

    /// Malformed input to a decoder. `offset` is the position of the first
    /// inconsistency when it is known.
    #[error("decode error: {msg}{}", offset.map(|o| format!(" (offset {o})")).unwrap_or_default())]
    Decode { msg: String, offset: Option<usize> },

    /// A decoder could not commit to a single interpretation of its input.
    #[error("ambiguous: {0}")]
    Ambiguous(String),

    /// An enumeration exceeded its size budget; the message names the cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Reading or writing files (CLI surface).
    #[error("io error: {0}")]
    Io(String),
}

impl CodecError {
    pub fn params(msg: impl Into<String>) -> Self {
        CodecError::Params(msg.into())
    }

    pub fn feasibility(msg: impl Into<String>) -> Self {
        CodecError::Feasibility(msg.into())
    }

    pub fn decode(msg: impl Into<String>, offset: Option<usize>) -> Self {
        CodecError::Decode {
            msg: msg.into(),
            offset,
        }
    }
}

pub type Result<T> = std::result::Result<T, CodecError>;
