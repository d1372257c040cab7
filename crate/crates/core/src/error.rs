use thiserror::Error;

/// Errors raised by the bound calculus and its experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input (shapes, lengths, ranges).
    #[error("invalid input: {0}")]
    Input(String),

    /// A theorem hypothesis does not hold for the requested configuration.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The exact search was asked to run beyond its size budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
