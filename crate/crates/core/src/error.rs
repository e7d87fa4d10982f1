use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter or argument violates a documented invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The dense representation was requested beyond its size ceiling.
    #[error(
        "chain length {chain_len} exceeds the dense ceiling of {max}; use the matrix-free solver"
    )]
    DenseTooLarge { chain_len: usize, max: usize },

    /// A vector or matrix has the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The iterative eigensolver ran out of matrix applications.
    #[error("eigensolver did not converge after {applications} applications (last residual {residual:e})")]
    NotConverged { applications: usize, residual: f64 },

    /// A density matrix has an eigenvalue that is negative beyond roundoff.
    #[error("density matrix has eigenvalue {0:e} below the validity floor")]
    NegativeEigenvalue(f64),

    /// Every start of the finite-size scaling fit failed.
    #[error("scaling fit failed: {0}")]
    FitFailed(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
