use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid pair ({i},{j}): indices must satisfy i < j < n")]
    InvalidPair { i: usize, j: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Memory or enumeration budget exceeded; `detail` names the offender
    /// (for elimination: the bucket and its scope).
    #[error("resource limit exceeded: {detail}")]
    Resource { detail: String },
}
