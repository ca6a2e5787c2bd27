use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested weight cutoff discards more than the allowed mass.
    #[error("weight cutoff too small: declared tail {tail:.3e} exceeds {threshold:.1e}; smallest adequate w_max is {required}")]
    Truncation {
        tail: f64,
        threshold: f64,
        required: usize,
    },

    #[error("oracle budget exceeded: {requested} entries requested, cap is {cap}")]
    Budget { requested: u128, cap: u128 },

    #[error("malformed dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
