//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the kernels, spectra and regressors are generic over.
///
/// Implemented for [`f32`] and [`f64`]. Experiments and the CLI run in `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    /// Lossless widening to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// Slack allowed on `|u| <= 1` before an argument is a domain error.
    fn clamp_slack() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(16.0))
    }

    /// Slack allowed on `||x|| = 1` for points on the sphere.
    fn norm_slack() -> Self {
        Self::lit(1e-8).max(Self::epsilon() * Self::lit(16.0))
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Dot product with four independent accumulators.
///
/// The summation order depends only on the slice length, so results are
/// reproducible regardless of how callers distribute work across threads.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let rem_a = chunks_a.remainder();
    let rem_b = chunks_b.remainder();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] = acc[0] + ca[0] * cb[0];
        acc[1] = acc[1] + ca[1] * cb[1];
        acc[2] = acc[2] + ca[2] * cb[2];
        acc[3] = acc[3] + ca[3] * cb[3];
    }
    let mut tail = T::zero();
    for (x, y) in rem_a.iter().zip(rem_b) {
        tail = tail + *x * *y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Euclidean norm.
#[inline]
pub fn norm<T: Scalar>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..11).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn slack_depends_on_precision() {
        assert_eq!(f64::clamp_slack(), 1e-12);
        assert!(f32::clamp_slack() > 1e-7);
        assert_eq!(f64::norm_slack(), 1e-8);
    }
}
