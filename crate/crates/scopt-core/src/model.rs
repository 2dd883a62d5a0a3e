//! The sparse covariance estimation instance: objective, gradient,
//! Kronecker-structured Hessian products, local norms, and the synthetic
//! data protocol.
//!
//! With `p = n^2` and `x = vec(Theta)`, the composite objective is
//!
//! ```text
//! F(x) = f(x) + g(x)
//! f(x) = 1/(2*rho) * ||x - vec(S)||^2 - log det(mat(x))
//! g(x) = lambda/rho * ||x||_1
//! ```
//!
//! where `S` is the sample covariance. The gradient and Hessian of the
//! smooth part are
//!
//! ```text
//! grad f(x) = (x - vec(S))/rho - vec(Theta^{-1})
//! hess f(x) = I/rho + Theta^{-1} (x) Theta^{-1}      (Kronecker product)
//! ```
//!
//! The Hessian is never materialized: products use
//! `vec(A X B) = (B' (x) A) vec(X)`, giving `O(n^3)` applications.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::ModelError;
use crate::linalg::{self, CholeskyFactor, SymMatrix};
use crate::math;

/// Multiplicative guard applied to the power-method eigenvalue estimate
/// before it enters the Lipschitz constant. Shrinking the estimate can only
/// enlarge `L`, and any over-estimate of the true Lipschitz constant keeps
/// the proximal-gradient steps valid.
pub const MIN_EIG_GUARD: f64 = 0.99;

/// Average diagonal magnitude of synthetic covariances. Keeps the planted
/// off-diagonal entries well above the l1 threshold range exercised in the
/// experiments so that support recovery is informative.
pub const SYNTH_DIAG_SCALE: f64 = 7.0;

/// A sparse covariance estimation instance: sample covariance `S` plus the
/// `rho` (fidelity) and `lambda` (sparsity) parameters.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    sigma_hat: SymMatrix,
    sigma_hat_vec: Vec<f64>,
    rho: f64,
    lambda: f64,
}

impl ProblemSpec {
    /// `sigma_hat` may be rank-deficient (positive semidefinite); only the
    /// solver iterates must stay positive-definite.
    pub fn new(sigma_hat: SymMatrix, rho: f64, lambda: f64) -> Result<Self, ModelError> {
        if !(rho > 0.0) {
            return Err(ModelError::NonPositiveParameter {
                name: "rho",
                value: rho,
            });
        }
        if !(lambda > 0.0) && lambda != 0.0 {
            return Err(ModelError::NonPositiveParameter {
                name: "lambda",
                value: lambda,
            });
        }
        if lambda < 0.0 {
            return Err(ModelError::NonPositiveParameter {
                name: "lambda",
                value: lambda,
            });
        }
        let sigma_hat_vec = linalg::vec(&sigma_hat);
        Ok(ProblemSpec {
            sigma_hat,
            sigma_hat_vec,
            rho,
            lambda,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.sigma_hat.n()
    }

    /// Problem size `p = n^2` of the vectorized variable.
    #[inline]
    pub fn p(&self) -> usize {
        let n = self.n();
        n * n
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn sigma_hat(&self) -> &SymMatrix {
        &self.sigma_hat
    }

    #[inline]
    pub fn sigma_hat_vec(&self) -> &[f64] {
        &self.sigma_hat_vec
    }

    /// The nonsmooth part `g(x) = lambda/rho * ||x||_1`.
    pub fn g_value(&self, x: &[f64]) -> f64 {
        self.lambda / self.rho * math::norm1(x)
    }

    /// Smooth part `f(x)`, given the log-determinant of `mat(x)`.
    fn f_value_with_logdet(&self, x: &[f64], logdet: f64) -> f64 {
        let mut fid = 0.0;
        for (xi, si) in x.iter().zip(&self.sigma_hat_vec) {
            let d = xi - si;
            fid += d * d;
        }
        fid / (2.0 * self.rho) - logdet
    }

    /// Full objective `F(x) = f(x) + g(x)`.
    ///
    /// Fails with a positive-definiteness error when `mat(x)` is outside
    /// the domain.
    pub fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        let theta = linalg::mat(x)?;
        let logdet = linalg::log_det(&theta)?;
        Ok(self.f_value_with_logdet(x, logdet) + self.g_value(x))
    }

    /// Hessian-vector product `v/rho + vec(Theta^{-1} mat(v) Theta^{-1})`.
    ///
    /// `v` may be an arbitrary direction of length `n^2`; no symmetry is
    /// required or imposed.
    pub fn hessian_apply(&self, it: &Iterate, v: &[f64]) -> Result<Vec<f64>, ModelError> {
        let n = self.n();
        if v.len() != n * n {
            return Err(crate::error::LinalgError::NonSquareLength { len: v.len() }.into());
        }
        let mut x_mat = vec![0.0; n * n];
        linalg::reshape_colmajor(v, n, &mut x_mat);
        let mut tmp = vec![0.0; n * n];
        let inv = it.theta_inv.as_slice();
        linalg::matmul(inv, &x_mat, n, &mut tmp);
        linalg::matmul(&tmp, inv, n, &mut x_mat);
        let mut out = vec![0.0; n * n];
        linalg::flatten_colmajor(&x_mat, n, &mut out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o += vi / self.rho;
        }
        Ok(out)
    }

    /// Local norm `||v||_x = sqrt(v' hess f(x) v)` at the iterate.
    pub fn local_norm(&self, it: &Iterate, v: &[f64]) -> Result<f64, ModelError> {
        let hv = self.hessian_apply(it, v)?;
        Ok(math::sqrt(math::fmax(math::dot(v, &hv), 0.0)))
    }

    /// Lipschitz constant of the subproblem gradient:
    /// `L = 1/rho + 1/lambda_min(Theta)^2`, with the power-method estimate
    /// of `lambda_min` shrunk by [`MIN_EIG_GUARD`] so `L` errs upward.
    pub fn lipschitz_constant(&self, it: &Iterate, power_iters: usize) -> f64 {
        let lam = MIN_EIG_GUARD * linalg::min_eig_power_from_factor(&it.chol, power_iters);
        1.0 / self.rho + 1.0 / (lam * lam)
    }

    /// Default starting point `vec(diag(S))`. Non-positive diagonal entries
    /// (possible only for degenerate inputs) are clamped so the start stays
    /// inside the domain.
    pub fn default_start(&self) -> Vec<f64> {
        let n = self.n();
        let mean_diag = self
            .sigma_hat
            .diag()
            .iter()
            .map(|d| math::abs(*d))
            .sum::<f64>()
            / n as f64;
        let floor = math::fmax(1e-8, 1e-8 * mean_diag);
        let mut x = vec![0.0; n * n];
        for i in 0..n {
            x[i * n + i] = math::fmax(self.sigma_hat.get(i, i), floor);
        }
        x
    }
}

/// An interior point of the domain with its cached factorization, inverse,
/// smooth objective value and gradient. All fields are computed once on
/// construction and treated as immutable; the inner solver reuses them for
/// every subproblem iteration.
#[derive(Debug, Clone)]
pub struct Iterate {
    x: Vec<f64>,
    theta: SymMatrix,
    chol: CholeskyFactor,
    theta_inv: SymMatrix,
    f_value: f64,
    grad: Vec<f64>,
}

impl Iterate {
    /// Fails with a positive-definiteness error when `mat(x)` is outside
    /// the domain.
    pub fn new(spec: &ProblemSpec, x: Vec<f64>) -> Result<Self, ModelError> {
        let theta = linalg::mat(&x)?;
        if theta.n() != spec.n() {
            return Err(ModelError::DimensionMismatch {
                expected: spec.p(),
                got: x.len(),
            });
        }
        let chol = linalg::cholesky(&theta)?;
        let theta_inv = linalg::inverse_from_factor(&chol);
        let f_value = spec.f_value_with_logdet(&x, chol.log_det());
        let inv_vec = linalg::vec(&theta_inv);
        let grad: Vec<f64> = x
            .iter()
            .zip(&spec.sigma_hat_vec)
            .zip(&inv_vec)
            .map(|((xi, si), wi)| (xi - si) / spec.rho - wi)
            .collect();
        Ok(Iterate {
            x,
            theta,
            chol,
            theta_inv,
            f_value,
            grad,
        })
    }

    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    #[inline]
    pub fn theta(&self) -> &SymMatrix {
        &self.theta
    }

    #[inline]
    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.chol
    }

    #[inline]
    pub fn theta_inv(&self) -> &SymMatrix {
        &self.theta_inv
    }

    /// Value of the smooth part `f` at this iterate.
    #[inline]
    pub fn f_value(&self) -> f64 {
        self.f_value
    }

    /// Gradient of the smooth part `f` at this iterate.
    #[inline]
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    /// Full objective `F = f + g` at this iterate.
    pub fn objective(&self, spec: &ProblemSpec) -> f64 {
        self.f_value + spec.g_value(&self.x)
    }
}

/// Sample covariance `(1/N) sum_j x_j x_j'` without mean centering.
pub fn sample_covariance(samples: &[Vec<f64>]) -> Result<SymMatrix, ModelError> {
    let first = samples.first().ok_or(ModelError::EmptySampleSet)?;
    let n = first.len();
    let mut data = vec![0.0; n * n];
    for s in samples {
        if s.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
        for i in 0..n {
            let si = s[i];
            if si == 0.0 {
                continue;
            }
            for j in 0..n {
                data[i * n + j] += si * s[j];
            }
        }
    }
    let scale = 1.0 / samples.len() as f64;
    for v in &mut data {
        *v *= scale;
    }
    Ok(SymMatrix::symmetrized(n, data))
}

/// Subtracts the per-coordinate sample mean. Composing with
/// [`sample_covariance`] yields the mean-centered estimate used for real
/// return series.
pub fn mean_center(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let n = first.len();
    let mut mean = vec![0.0; n];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    let scale = 1.0 / samples.len() as f64;
    for m in &mut mean {
        *m *= scale;
    }
    samples
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect()
}

/// Generates a random sparse positive-definite covariance with exactly
/// `k = round(sparsity * n^2)` nonzeros (rounded down to preserve symmetry).
///
/// Construction: the requested off-diagonal budget is packed into disjoint
/// equicorrelated blocks over a random node assignment. Each block of size
/// `m` gets a correlation drawn from `[0.3, 0.85]` (sign is randomized for
/// pair blocks, where any `|c| < 1` keeps the block positive-definite).
/// The result has constant diagonal [`SYNTH_DIAG_SCALE`], so the planted
/// off-diagonal magnitudes sit well above the estimation thresholds used in
/// the experiments. Fully deterministic for a given seed.
pub fn synth_sparse_cov(n: usize, sparsity: f64, seed: u64) -> Result<SymMatrix, ModelError> {
    assert!(n >= 1);
    assert!(
        sparsity > 0.0 && sparsity <= 1.0,
        "sparsity must lie in (0, 1]"
    );
    let k = math::round(sparsity * (n * n) as f64) as usize;
    if k < n {
        return Err(ModelError::SparsityTooLowForPd { k, n });
    }
    let off_budget = (k - n) / 2 * 2; // symmetric support: even count
    let blocks = pack_blocks(off_budget, n).ok_or(ModelError::SparsityTooLowForPd { k, n })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);

    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        m.set_sym(i, i, 1.0);
    }
    let mut cursor = 0;
    for &size in &blocks {
        let members = &nodes[cursor..cursor + size];
        cursor += size;
        let mut c = rng.random_range(0.3..0.85);
        if size == 2 && rng.random_range(0.0..1.0) < 0.5 {
            c = -c;
        }
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                m.set_sym(i, j, c);
            }
        }
    }
    let m = m.scale(SYNTH_DIAG_SCALE);
    debug_assert_eq!(m.nnz(0.0), n + off_budget);
    // Equicorrelated blocks with |c| < 1 (and c > -1/(m-1)) are positive
    // definite by construction; the factorization check guards the
    // invariant anyway.
    linalg::cholesky(&m)?;
    Ok(m)
}

/// Splits an even off-diagonal budget into disjoint block sizes with
/// `sum m*(m-1) == budget` and `sum m <= n`.
fn pack_blocks(mut budget: usize, n: usize) -> Option<Vec<usize>> {
    let mut blocks = Vec::new();
    let mut free = n;
    while budget > 0 {
        if free < 2 {
            return None;
        }
        // Largest m with m*(m-1) <= budget, capped by the free nodes.
        let mut m = ((1.0 + math::sqrt(1.0 + 4.0 * budget as f64)) / 2.0) as usize;
        m = m.min(free);
        while m * (m - 1) > budget {
            m -= 1;
        }
        if m < 2 {
            return None;
        }
        // A remainder below 2 cannot be packed by any further block; shrink
        // this one so the remainder stays even and reachable with pairs.
        while m > 2 && free - m < (budget - m * (m - 1)) / 2 * 2 / 2 {
            let rem = budget - m * (m - 1);
            if rem == 0 || (free - m) * 2 >= rem {
                break;
            }
            m -= 1;
        }
        blocks.push(m);
        budget -= m * (m - 1);
        free -= m;
    }
    Some(blocks)
}

/// Draws `count` i.i.d. samples from `N(0, cov)` via the Cholesky factor.
/// Deterministic for a given seed.
pub fn gaussian_samples(
    cov: &SymMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ModelError> {
    let factor = linalg::cholesky(cov)?;
    let n = cov.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut g = vec![0.0; n];
    for _ in 0..count {
        for gi in g.iter_mut() {
            *gi = rng.sample(StandardNormal);
        }
        out.push(factor.apply_lower(&g));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_1d(sigma: f64, rho: f64, lambda: f64) -> ProblemSpec {
        ProblemSpec::new(SymMatrix::from_diag(&[sigma]), rho, lambda).unwrap()
    }

    #[test]
    fn objective_scalar_cases() {
        let spec = spec_1d(1.0, 1.0, 0.0);
        assert_relative_eq!(spec.objective(&[1.0]).unwrap(), 0.0);

        let spec = spec_1d(0.0, 0.5, 0.5);
        assert_relative_eq!(spec.objective(&[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn objective_two_by_two() {
        let spec = ProblemSpec::new(SymMatrix::identity(2), 1.0, 1.0).unwrap();
        let x = linalg::vec(&SymMatrix::identity(2).scale(2.0));
        let expected = 1.0 - 4.0_f64.ln() + 4.0;
        assert_relative_eq!(spec.objective(&x).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn objective_rejects_indefinite_point() {
        let spec = spec_1d(1.0, 1.0, 0.0);
        assert!(spec.objective(&[-1.0]).is_err());
    }

    #[test]
    fn gradient_closed_forms() {
        // rho = 1, S = I, x = vec(I): first term vanishes, inverse of I.
        let spec = ProblemSpec::new(SymMatrix::identity(2), 1.0, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(2))).unwrap();
        let expected = [-1.0, 0.0, 0.0, -1.0];
        for (g, e) in it.gradient().iter().zip(&expected) {
            assert_relative_eq!(g, e, epsilon = 1e-14);
        }

        // Scalar: rho = 0.5, S = 0, x = 1 -> 2*1 - 1 = 1.
        let spec = spec_1d(0.0, 0.5, 0.0);
        let it = Iterate::new(&spec, alloc::vec![1.0]).unwrap();
        assert_relative_eq!(it.gradient()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hessian_identity_doubles() {
        let spec = ProblemSpec::new(SymMatrix::identity(3), 1.0, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(3))).unwrap();
        let v: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
        let hv = spec.hessian_apply(&it, &v).unwrap();
        for (h, vi) in hv.iter().zip(&v) {
            assert_relative_eq!(h, &(2.0 * vi), epsilon = 1e-14);
        }
    }

    #[test]
    fn hessian_scaled_identity() {
        // Theta = 2I, rho = 0.25, v = vec(I): v/rho + vec(I/4) = 4.25 v.
        let spec = ProblemSpec::new(SymMatrix::identity(2), 0.25, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(2).scale(2.0))).unwrap();
        let v = linalg::vec(&SymMatrix::identity(2));
        let hv = spec.hessian_apply(&it, &v).unwrap();
        for (h, vi) in hv.iter().zip(&v) {
            assert_relative_eq!(h, &(4.25 * vi), epsilon = 1e-14);
        }
    }

    #[test]
    fn hessian_rejects_bad_length() {
        let spec = ProblemSpec::new(SymMatrix::identity(2), 1.0, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(2))).unwrap();
        assert!(spec.hessian_apply(&it, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn local_norm_cases() {
        let spec = ProblemSpec::new(SymMatrix::identity(2), 1.0, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(2))).unwrap();
        let mut e1 = alloc::vec![0.0; 4];
        e1[0] = 1.0;
        assert_relative_eq!(
            spec.local_norm(&it, &e1).unwrap(),
            2.0_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_eq!(spec.local_norm(&it, &[0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_closed_forms() {
        let spec = ProblemSpec::new(SymMatrix::identity(2), 0.1, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::identity(2))).unwrap();
        let l = spec.lipschitz_constant(&it, 20);
        assert_relative_eq!(l, 10.0 + 1.0 / (0.99 * 0.99), epsilon = 1e-9);

        let spec = ProblemSpec::new(SymMatrix::identity(2), 1.0, 0.0).unwrap();
        let it = Iterate::new(&spec, linalg::vec(&SymMatrix::from_diag(&[0.5, 2.0]))).unwrap();
        let l = spec.lipschitz_constant(&it, 100);
        assert_relative_eq!(l, 1.0 + 1.0 / (0.99 * 0.5645).powi(2), max_relative = 2e-1);
        assert_relative_eq!(l, 1.0 + 1.0 / (0.99 * 0.5) / (0.99 * 0.5), max_relative = 1e-6);
    }

    #[test]
    fn sample_covariance_cases() {
        let cov = sample_covariance(&[alloc::vec![1.0, 0.0], alloc::vec![-1.0, 0.0]]).unwrap();
        assert_eq!(cov.get(0, 0), 1.0);
        assert_eq!(cov.get(0, 1), 0.0);
        assert_eq!(cov.get(1, 1), 0.0);

        let cov = sample_covariance(&[alloc::vec![2.0]]).unwrap();
        assert_eq!(cov.get(0, 0), 4.0);

        let cov = sample_covariance(&[alloc::vec![0.0, 0.0]; 5]).unwrap();
        assert_eq!(cov, SymMatrix::zeros(2));

        assert!(matches!(
            sample_covariance(&[]),
            Err(ModelError::EmptySampleSet)
        ));
        assert!(matches!(
            sample_covariance(&[alloc::vec![1.0], alloc::vec![1.0, 2.0]]),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mean_center_removes_mean() {
        let centered = mean_center(&[alloc::vec![1.0, 4.0], alloc::vec![3.0, 0.0]]);
        assert_eq!(centered[0], alloc::vec![-1.0, 2.0]);
        assert_eq!(centered[1], alloc::vec![1.0, -2.0]);
    }

    #[test]
    fn synth_diag_only_when_budget_is_tight() {
        let m = synth_sparse_cov(10, 0.1, 3).unwrap();
        assert_eq!(m.nnz(0.0), 10);
        for i in 0..10 {
            assert_eq!(m.get(i, i), SYNTH_DIAG_SCALE);
        }
    }

    #[test]
    fn synth_is_deterministic_and_pd() {
        let a = synth_sparse_cov(50, 0.2, 7).unwrap();
        let b = synth_sparse_cov(50, 0.2, 7).unwrap();
        assert_eq!(a, b);
        assert!(linalg::cholesky(&a).is_ok());
        let k = math::round(0.2 * 2500.0) as usize;
        let expected = 50 + (k - 50) / 2 * 2;
        assert_eq!(a.nnz(0.0), expected);
    }

    #[test]
    fn synth_support_is_symmetric_across_sizes() {
        for (n, sparsity, seed) in [(20, 0.15, 1), (35, 0.4, 2), (16, 1.0, 3)] {
            let m = synth_sparse_cov(n, sparsity, seed).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
            assert!(linalg::cholesky(&m).is_ok());
        }
    }

    #[test]
    fn synth_rejects_sub_diagonal_budget() {
        assert!(matches!(
            synth_sparse_cov(10, 0.05, 0),
            Err(ModelError::SparsityTooLowForPd { k: 5, n: 10 })
        ));
    }

    #[test]
    fn gaussian_samples_deterministic() {
        let cov = SymMatrix::identity(2);
        let a = gaussian_samples(&cov, 3, 11).unwrap();
        let b = gaussian_samples(&cov, 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].len(), 2);
        assert!(gaussian_samples(&cov, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn gaussian_samples_match_variance() {
        let cov = SymMatrix::from_diag(&[4.0]);
        let samples = gaussian_samples(&cov, 10000, 5).unwrap();
        let var = samples.iter().map(|s| s[0] * s[0]).sum::<f64>() / samples.len() as f64;
        // Var of the sample variance is 2*sigma^4/N; allow three standard errors.
        let se = (2.0 * 16.0 / 10000.0_f64).sqrt();
        assert!((var - 4.0).abs() < 3.0 * se, "var = {var}");
    }

    #[test]
    fn default_start_is_diagonal_of_sigma_hat() {
        let spec = ProblemSpec::new(
            SymMatrix::from_rows(2, alloc::vec![2.0, 0.5, 0.5, 3.0]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let x0 = spec.default_start();
        assert_eq!(x0, alloc::vec![2.0, 0.0, 0.0, 3.0]);
    }
}
