//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the fusion core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitCiError {
    /// A Cholesky factorization hit a non-positive (or non-finite) pivot,
    /// i.e. the matrix is not positive definite within machine precision.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Requested rank outside `0..=n`.
    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    /// A positive-semidefiniteness precondition failed.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// A Loewner-ordering precondition failed (names the ordering).
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Bisection failed to shrink the bracket to the requested width,
    /// which signals a weight tolerance too small for the conditioning.
    #[error("bisection exceeded {0} iterations before reaching the width tolerance")]
    MaxIterExceeded(usize),
}
