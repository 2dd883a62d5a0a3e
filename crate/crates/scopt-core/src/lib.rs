//! Inexact self-concordant proximal-Newton solver for sparse covariance
//! estimation.
//!
//! The crate minimizes composite objectives of the form
//!
//! ```text
//! F(x) = 1/(2*rho) * ||x - vec(S)||^2 - log det(mat(x)) + lambda/rho * ||x||_1
//! ```
//!
//! over vectorized symmetric positive-definite matrices, where `S` is a
//! (possibly rank-deficient) sample covariance. The smooth part is
//! self-concordant rather than Lipschitz-smooth, so the outer loop is a
//! damped proximal-Newton iteration driven by the Newton decrement, with an
//! optional forward line search. Each Newton subproblem is an l1-regularized
//! quadratic solved by FISTA to a certified accuracy; the certificate feeds
//! the outer step-size rule and the runtime convergence diagnostics.
//!
//! Module map:
//!
//! * [`linalg`] — dense symmetric kernels: Cholesky, log-determinant,
//!   inverse, extreme-eigenvalue power iteration, `vec`/`mat` maps.
//! * [`model`] — the covariance estimation instance: objective, gradient,
//!   Kronecker-structured Hessian products, local norms, data generation.
//! * [`inner`] — the FISTA subproblem solver with warm starts and a
//!   certified duality-gap bound.
//! * [`solver`] — the outer proximal-Newton loop, step-size rules, trace
//!   records and theorem-bound audits.
//! * [`portfolio`] — mean-variance portfolio selection on top of a
//!   covariance estimate.
//!
//! The crate is `no_std`-compatible (`default-features = false`); it then
//! relies on `alloc` and `libm`. Wall-clock limits and the convenience
//! entry points use `std` and are feature-gated.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod inner;
pub mod linalg;
mod math;
pub mod model;
pub mod portfolio;
pub mod solver;

pub use error::{InnerError, LinalgError, ModelError, PortfolioError, SolverError};
pub use linalg::{CholeskyFactor, SymMatrix};
pub use model::{Iterate, ProblemSpec};
pub use solver::{SolveOutcome, SolverConfig, Termination};
