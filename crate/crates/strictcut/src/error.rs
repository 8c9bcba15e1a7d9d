use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A vertex or edge id outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("size error: {what} has size {size}, cap is {cap}")]
    Size { what: &'static str, size: usize, cap: usize },
    /// A pluggable routine broke its own contract; carries the witness.
    #[error("oracle misbehavior in {routine}: {witness}")]
    OracleMisbehavior { routine: String, witness: String },
    /// A runtime guarantee check failed.
    #[error("contract violated [{check}]: {witness}")]
    ContractViolation { check: &'static str, witness: String },
    #[error("internal invariant broken [{check}]: {witness}")]
    Internal { check: &'static str, witness: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors that mean a promised guarantee did not hold.
    pub fn is_guarantee_failure(&self) -> bool {
        matches!(
            self,
            Error::ContractViolation { .. } | Error::Internal { .. } | Error::OracleMisbehavior { .. }
        )
    }
}
