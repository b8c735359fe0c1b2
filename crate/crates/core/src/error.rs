use alloc::string::String;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter is out of its domain (size 0, r > n, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An input object violates its invariants.
    #[error("validation failed: {0}")]
    Validation(String),
    /// An exhaustive search would exceed its enumeration guard.
    #[error("resource guard exceeded: {0}; shrink the instance")]
    ResourceGuard(String),
    /// An iterative solver hit its iteration cap.
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    /// A postcondition that the construction guarantees was violated.
    #[error("internal check failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
