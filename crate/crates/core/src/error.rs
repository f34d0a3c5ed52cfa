use thiserror::Error;

/// Errors raised by the token-lab library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("first-passage law has a point mass: {0}")]
    Singularity(String),

    #[error("first-passage law has infinite mean")]
    InfiniteMean,

    #[error("inconsistent schedule/arrivals: {0}")]
    Inconsistent(String),

    #[error("M = {tokens} exceeds the limit of {limit} for {what}")]
    TooLarge {
        tokens: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("numeric consistency failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
