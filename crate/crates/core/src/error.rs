use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("size cap exceeded: {what} requires {required}, cap is {cap}")]
    SizeCap {
        what: &'static str,
        required: u128,
        cap: u128,
    },
    #[error("query budget exhausted")]
    BudgetExhausted,
    #[error("query protocol violation: {0}")]
    Protocol(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("objective is not declared monotone")]
    NotMonotone,
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
