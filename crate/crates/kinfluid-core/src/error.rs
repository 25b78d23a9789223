//! Error type shared by the velocity-space modules.

use thiserror::Error;

/// Errors produced by grid construction, assembly, and solves.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Grid parameters outside the supported range.
    #[error("invalid grid parameter: {0}")]
    InvalidGrid(String),

    /// Operator or function built on a different grid than the one supplied.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Invalid numerical parameter (quadrature order, tolerance, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A constrained solve was asked to invert a right-hand side that has a
    /// component in the null space.
    #[error("right-hand side is not microscopic: {0}")]
    NotMicroscopic(String),

    /// A linear solve or factorization failed to reach its tolerance.
    #[error("solve failed: {0}")]
    SolveFailure(String),

    /// An iterative eigenvalue estimate failed to converge.
    #[error("eigenvalue iteration failed: {0}")]
    EigenFailure(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
