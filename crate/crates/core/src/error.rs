use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("precision underflow: {0}")]
    Precision(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("closure violation: {0}")]
    Closure(String),
    #[error("character error: {0}")]
    Character(String),
    #[error("group structure error: {0}")]
    Structure(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("not a member: {0}")]
    Membership(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
