//! Scalar float helpers that work in both `std` and `no_std` builds.

#[cfg(feature = "std")]
#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    x.ceil()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[cfg(feature = "std")]
#[inline]
pub(crate) fn round(x: f64) -> f64 {
    x.round()
}

#[cfg(not(feature = "std"))]
#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    f64::abs(x)
}

#[inline]
pub(crate) fn fmax(a: f64, b: f64) -> f64 {
    f64::max(a, b)
}

#[inline]
pub(crate) fn fmin(a: f64, b: f64) -> f64 {
    f64::min(a, b)
}

/// Euclidean norm of a slice.
#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// l1 norm of a slice.
#[inline]
pub(crate) fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| abs(*x)).sum()
}

/// Dot product.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
