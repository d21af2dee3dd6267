use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("region kind mismatch: expected {expected}, got {got}")]
    RegionKind { expected: &'static str, got: String },
    #[error("instance has {bits} bits, above the enumeration limit of {limit}")]
    SizeLimit { bits: usize, limit: usize },
    #[error("region would have {cells} cells, above the memory bound of {limit}")]
    ResourceLimit { cells: usize, limit: usize },
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
