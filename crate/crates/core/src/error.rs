use std::io;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exact enumeration needs {needed} subsets, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("unsupported score generator: {0}")]
    UnsupportedGenerator(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("no closed-form oracle scorer for {0}")]
    NoClosedFormOracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
