//! Error types shared across the solver crates.

use thiserror::Error;

/// Errors from the dense symmetric linear-algebra kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    /// A vector of length `len` cannot be reshaped into a square matrix.
    #[error("vector length {len} is not a perfect square")]
    NonSquareLength { len: usize },
    /// Reshaping produced a matrix whose symmetry deviation exceeds the
    /// tolerance.
    #[error("input is asymmetric: max deviation {max_dev:e} exceeds tolerance {tol:e}")]
    AsymmetricInput { max_dev: f64, tol: f64 },
    /// Cholesky factorization failed; the matrix is not positive-definite.
    /// Carries the pivot index at which the factorization broke down.
    #[error("matrix is not positive-definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Errors from the covariance-model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// The sample set is empty.
    #[error("sample set is empty")]
    EmptySampleSet,
    /// Samples (or vectors) have inconsistent dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// The requested nonzero count cannot cover the diagonal.
    #[error("requested {k} nonzeros but a positive-definite {n}x{n} matrix needs at least {n}")]
    SparsityTooLowForPd { k: usize, n: usize },
    /// A parameter that must be positive was not.
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    /// Propagated linear-algebra failure (typically loss of positive
    /// definiteness).
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Errors from the FISTA subproblem solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerError {
    /// The iteration budget ran out before the duality-gap certificate
    /// reached the requested accuracy. Carries the best iterate found so
    /// the caller can decide whether it is usable.
    #[error("inner solver hit the iteration cap ({iterations}) with gap bound {gap_bound:e}")]
    MaxInnerIterations {
        iterations: usize,
        gap_bound: f64,
        delta: alloc::vec::Vec<f64>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the outer proximal-Newton loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    /// A user-supplied starting point is outside the domain.
    #[error("starting point is not positive-definite")]
    NotPositiveDefiniteStart,
    /// Even after the maximum number of step halvings the trial iterate
    /// failed the positive-definiteness check.
    #[error("iteration {iteration}: step left the domain after {halvings} halvings")]
    StepLeftDomain { iteration: usize, halvings: u32 },
    /// The Newton decrement fell below the inner-accuracy noise floor
    /// `sqrt(2*eps)`, where the damped step-size formula is undefined.
    #[error("decrement {epsilon:e} is below the noise floor {floor:e}")]
    DecrementBelowNoise { epsilon: f64, floor: f64 },
    /// `omega_star(t)` was requested for `t >= 1`.
    #[error("omega_star domain violation: t = {t}")]
    OmegaStarDomain { t: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inner(#[from] InnerError),
}

/// Errors from mean-variance portfolio construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PortfolioError {
    /// The constraint set {w >= 0, sum w = C, w'r = mu} is empty.
    #[error("infeasible target return {target}: achievable range is [{lo}, {hi}]")]
    Infeasible { target: f64, lo: f64, hi: f64 },
    /// The projected-gradient loop hit its iteration cap.
    #[error("QP did not converge: KKT residual {kkt_residual:e} after {iterations} iterations")]
    NotConverged { kkt_residual: f64, iterations: usize },
    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
