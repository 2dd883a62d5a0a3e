//! Dense symmetric linear algebra: Cholesky factorization, log-determinant,
//! inverse, extreme-eigenvalue estimation, and the column-stacking
//! `vec`/`mat` maps.
//!
//! Matrices are stored densely in row-major order. Symmetry is enforced on
//! construction, so `vec` and `mat` round-trip bitwise and every kernel can
//! assume exact entrywise symmetry.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::LinalgError;
use crate::math;

/// Absolute tolerance on the symmetry deviation accepted by [`mat`].
pub const MAT_SYMMETRY_TOL: f64 = 1e-12;

/// Dense symmetric `n x n` matrix.
///
/// The invariant `data[i][j] == data[j][i]` holds bitwise: constructors
/// either verify symmetry or average the two triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, rejecting asymmetric input.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        let max_dev = max_asymmetry(&data, n);
        if max_dev > MAT_SYMMETRY_TOL {
            return Err(LinalgError::AsymmetricInput {
                max_dev,
                tol: MAT_SYMMETRY_TOL,
            });
        }
        Ok(Self::symmetrized(n, data))
    }

    /// Builds a matrix from row-major entries, averaging the two triangles.
    pub fn symmetrized(n: usize, mut data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "storage must be n*n");
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        SymMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = diag[i];
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::norm2(&self.data)
    }

    /// Number of entries with magnitude above `threshold`.
    pub fn nnz(&self, threshold: f64) -> usize {
        self.data.iter().filter(|v| math::abs(**v) > threshold).count()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            out[i] = math::dot(&self.data[i * self.n..(i + 1) * self.n], v);
        }
        out
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Quadratic form `v' M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        math::dot(v, &self.matvec(v))
    }
}

fn max_asymmetry(data: &[f64], n: usize) -> f64 {
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_dev = math::fmax(max_dev, math::abs(data[i * n + j] - data[j * n + i]));
        }
    }
    max_dev
}

/// Lower-triangular Cholesky factor `L` with `L L' = M`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major storage of the factor; entries above the diagonal are zero.
    #[inline]
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// `log det(M) = 2 * sum_i ln(L[i][i])`.
    pub fn log_det(&self) -> f64 {
        let n = self.n;
        2.0 * (0..n).map(|i| math::ln(self.lower[i * n + i])).sum::<f64>()
    }

    /// Solves `M x = b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        // L y = b
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let mut sum = x[i];
            for (j, lij) in row.iter().enumerate() {
                sum -= lij * x[j];
            }
            x[i] = sum / self.lower[i * n + i];
        }
        // L' x = y
        for i in (0..n).rev() {
            let mut sum = x[i];
            for j in (i + 1)..n {
                sum -= self.lower[j * n + i] * x[j];
            }
            x[i] = sum / self.lower[i * n + i];
        }
    }

    /// Applies the factor itself: `y = L v`. Used to draw correlated
    /// Gaussian samples.
    pub fn apply_lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = math::dot(&self.lower[i * n..i * n + i + 1], &v[..i + 1]);
        }
        out
    }

    /// Reconstructs `L L'`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = 0.0;
                for k in 0..=j {
                    sum += self.lower[i * n + k] * self.lower[j * n + k];
                }
                data[i * n + j] = sum;
                data[j * n + i] = sum;
            }
        }
        SymMatrix { n, data }
    }
}

/// Column-stacks a symmetric matrix into a vector of length `n^2`.
pub fn vec(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = m.data[i * n + j];
        }
    }
    out
}

/// Inverse of [`vec`]: reshapes a length-`n^2` vector back into a symmetric
/// matrix. Rejects non-square lengths and inputs whose symmetry deviation
/// exceeds [`MAT_SYMMETRY_TOL`]; accepted inputs are explicitly symmetrized.
pub fn mat(v: &[f64]) -> Result<SymMatrix, LinalgError> {
    let n = isqrt_exact(v.len()).ok_or(LinalgError::NonSquareLength { len: v.len() })?;
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            data[i * n + j] = v[j * n + i];
        }
    }
    let max_dev = max_asymmetry(&data, n);
    if max_dev > MAT_SYMMETRY_TOL {
        return Err(LinalgError::AsymmetricInput {
            max_dev,
            tol: MAT_SYMMETRY_TOL,
        });
    }
    Ok(SymMatrix::symmetrized(n, data))
}

fn isqrt_exact(len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    let mut r = math::round(math::sqrt(len as f64)) as usize;
    // Guard against float rounding at large sizes.
    while r * r > len {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= len {
        r += 1;
    }
    if r * r == len {
        Some(r)
    } else {
        None
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Failure reports the pivot index at which the factorization broke down,
/// which in the solver signals that an iterate left the domain.
pub fn cholesky(m: &SymMatrix) -> Result<CholeskyFactor, LinalgError> {
    let n = m.n;
    let mut lower = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m.data[i * n + j];
            for k in 0..j {
                sum -= lower[i * n + k] * lower[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(LinalgError::NotPositiveDefinite { pivot: i });
                }
                lower[i * n + i] = math::sqrt(sum);
            } else {
                lower[i * n + j] = sum / lower[j * n + j];
            }
        }
    }
    Ok(CholeskyFactor { n, lower })
}

/// `log det(M)` through the Cholesky factor.
pub fn log_det(m: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(cholesky(m)?.log_det())
}

/// Dense inverse of a positive-definite matrix via Cholesky solves.
pub fn inverse(m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    Ok(inverse_from_factor(&cholesky(m)?))
}

/// Inverse given an existing factor; the result is explicitly symmetrized.
pub fn inverse_from_factor(factor: &CholeskyFactor) -> SymMatrix {
    let n = factor.n;
    let mut data = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.fill(0.0);
        col[j] = 1.0;
        factor.solve_in_place(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
    SymMatrix::symmetrized(n, data)
}

/// Estimates the minimum eigenvalue of a positive-definite matrix by power
/// iteration on `M^{-1}` (inverse iteration), using Cholesky back-solves.
///
/// The starting vector is the normalized all-ones vector, so the estimate is
/// deterministic. The final value is the inverse Rayleigh quotient
/// `1 / (v' M^{-1} v)` of the last normalized iterate.
pub fn min_eig_power(m: &SymMatrix, iters: usize) -> Result<f64, LinalgError> {
    let factor = cholesky(m)?;
    Ok(min_eig_power_from_factor(&factor, iters))
}

/// Same as [`min_eig_power`] but reusing an existing factor.
pub fn min_eig_power_from_factor(factor: &CholeskyFactor, iters: usize) -> f64 {
    assert!(iters >= 1, "power iteration needs at least one step");
    let n = factor.n;
    let mut v = vec![1.0 / math::sqrt(n as f64); n];
    let mut w = vec![0.0; n];
    for _ in 0..iters {
        w.copy_from_slice(&v);
        factor.solve_in_place(&mut w);
        let norm = math::norm2(&w);
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    // Rayleigh quotient of M^{-1} at the final iterate.
    w.copy_from_slice(&v);
    factor.solve_in_place(&mut w);
    1.0 / math::dot(&v, &w)
}

/// Estimates the maximum eigenvalue of a positive-semidefinite matrix by
/// plain power iteration with the deterministic all-ones start.
pub fn max_eig_power(m: &SymMatrix, iters: usize) -> f64 {
    assert!(iters >= 1, "power iteration needs at least one step");
    let n = m.n;
    let mut v = vec![1.0 / math::sqrt(n as f64); n];
    for _ in 0..iters {
        let w = m.matvec(&v);
        let norm = math::norm2(&w);
        if norm == 0.0 || !norm.is_finite() {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    m.quadratic_form(&v)
}

/// Row-major dense matrix product `out = a * b` for `n x n` operands.
pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);
    debug_assert_eq!(out.len(), n * n);
    out.fill(0.0);
    for i in 0..n {
        let a_row = &a[i * n..(i + 1) * n];
        let out_row = &mut out[i * n..(i + 1) * n];
        for (k, &aik) in a_row.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// Reshapes a column-stacked vector into row-major dense storage without
/// any symmetry requirement. Used for Hessian products on arbitrary
/// directions.
pub(crate) fn reshape_colmajor(v: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(v.len(), n * n);
    for j in 0..n {
        for i in 0..n {
            out[i * n + j] = v[j * n + i];
        }
    }
}

/// Column-stacks row-major dense storage.
pub(crate) fn flatten_colmajor(m: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(m.len(), n * n);
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = m[i * n + j];
        }
    }
}
