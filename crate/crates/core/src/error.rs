//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Invalid configuration: bad bags/lexicon/scenario files, bad
    /// hyperparameters, malformed thresholds.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid or inconsistent input data: missing scores, malformed
    /// probability vectors, empty inputs where values are required.
    #[error("data error: {0}")]
    Data(String),

    /// Numerical failure (non-finite values where finite ones are required).
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
