//! Error type shared by the model, solver, and oracle layers.

use thiserror::Error;

/// Errors raised while constructing problem objects or running the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must agree on a dimension do not.
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A NaN or infinity showed up where only finite reals are allowed.
    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },

    /// The space dimension must be at least one.
    #[error("space dimension must be at least 1")]
    EmptySpace,

    /// The metric matrix is not symmetric within tolerance.
    #[error("metric is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    MetricNotSymmetric { max_asymmetry: f64 },

    /// The metric matrix has a non-positive eigenvalue.
    #[error("metric not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    MetricNotPositiveDefinite { min_eigenvalue: f64 },

    /// A dictionary needs at least one atom.
    #[error("dictionary must contain at least one atom")]
    EmptyDictionary,

    /// Dictionary atoms must be nonzero; `index` is the offending position.
    #[error("dictionary atom {index} is zero")]
    ZeroAtom { index: usize },

    /// The hypothesis C1 = min_d (|F d|^2 + lambda |d|^2) > 0 failed; the
    /// quotients in the selection rule are not bounded away from zero.
    #[error("condition C1 > 0 violated by atom {atom} (c1 = {c1:.3e})")]
    C1Violation { atom: usize, c1: f64 },

    /// A singular-vector index lies outside the computed system.
    #[error("singular-vector index {index} out of range (system has {available})")]
    InvalidIndex { index: usize, available: usize },

    /// A scalar parameter violates its contract (sign, range, finiteness).
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    /// A matrix factorization could not be completed.
    #[error("decomposition failed: {0}")]
    DecompositionFailure(&'static str),

    /// The iteration produced a non-finite quantity and was aborted.
    #[error("numerical abort at iteration {iteration}: {detail}")]
    NumericalAbort {
        iteration: usize,
        detail: &'static str,
    },

    /// A user-supplied basis that must be orthonormal is not.
    #[error("basis is not orthonormal (max deviation {max_deviation:.3e})")]
    BasisNotOrthonormal { max_deviation: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
