//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run or model configuration (dimensions, regimes, constants).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed or inconsistent dataset content.
    #[error("data error: {0}")]
    Data(String),

    /// Parse failure in an input file, with location context.
    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    /// An optimizer step produced or encountered a non-finite value.
    #[error("step error at t={step} (sample {sample}, coordinate {coordinate:?}): {message}")]
    Step {
        step: usize,
        sample: usize,
        coordinate: Option<usize>,
        message: String,
    },

    /// A parameter schedule left its valid numeric range.
    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
