//! Random-feature (RF) and neural tangent (NT) kernels for power-ReLU
//! activations `a_s(z) = max(0, z)^s` on the unit sphere.
//!
//! On `S^{d-1}` both kernels depend on the inputs only through `u = x·x'`,
//! so everything here is a map `[-1, 1] -> R`. The RF kernel is normalized
//! with `c² = 2 / (2s-1)!!`, which makes `κ_s(1) = 1` for every `s >= 1`.
//!
//! Closed forms are provided for `s ∈ {0, 1, 2, 3}`; `s = 0` (the step
//! activation) only appears as the derivative of the `s = 1` kernel. Deeper
//! networks are obtained by composing the two-layer maps.

mod monte_carlo;

pub use monte_carlo::{mc_estimate, McEstimate, McOracleConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, norm, Scalar};

/// Largest smoothness with a closed form.
pub const MAX_CLOSED_FORM_SMOOTHNESS: u32 = 3;

const SUPPORTED: &str = "0, 1, 2, 3";
const SUPPORTED_PUBLIC: &str = "1, 2, 3";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Random features: only the last layer is trained.
    Rf,
    /// Neural tangent: all layers trained in the lazy regime.
    Nt,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Rf => "rf",
            KernelFamily::Nt => "nt",
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" => Ok(KernelFamily::Rf),
            "nt" | "ntk" => Ok(KernelFamily::Nt),
            other => Err(Error::config(format!("unknown kernel family `{other}` (expected rf or nt)"))),
        }
    }
}

/// How the NT depth recursion treats the `c²` factor in front of
/// `κ^{l-1}_NT · κ'_s(κ^{l-1}_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NtRecursion {
    /// `c²` kept in front of the product.
    #[default]
    Scaled,
    /// `c²` dropped: `Θ^l = Θ^{l-1} Σ̇^l + Σ^l` with the normalized `κ'_s`.
    Standard,
}

/// Family, activation smoothness, depth and ambient dimension of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub smoothness: u32,
    pub depth: u32,
    pub dim: usize,
}

impl KernelSpec {
    /// Validates `s <= 3`, `l >= 2`, `d >= 2`. `s = 0` is accepted only for
    /// the RF family (the step kernel), where the Monte-Carlo oracle needs it.
    pub fn new(family: KernelFamily, smoothness: u32, depth: u32, dim: usize) -> Result<Self> {
        if smoothness > MAX_CLOSED_FORM_SMOOTHNESS {
            return Err(Error::UnsupportedSmoothness { s: smoothness, supported: SUPPORTED_PUBLIC });
        }
        if smoothness == 0 && family == KernelFamily::Nt {
            return Err(Error::UnsupportedSmoothness { s: 0, supported: SUPPORTED_PUBLIC });
        }
        if depth < 2 {
            return Err(Error::config(format!("depth l = {depth} but kernels need l >= 2")));
        }
        if dim < 2 {
            return Err(Error::config(format!("ambient dimension d = {dim} but d >= 2 is required")));
        }
        Ok(Self { family, smoothness, depth, dim })
    }

    pub fn two_layer(family: KernelFamily, smoothness: u32, dim: usize) -> Result<Self> {
        Self::new(family, smoothness, 2, dim)
    }

    /// Normalization `c² = 2 / (2s-1)!!`.
    pub fn c_squared(&self) -> f64 {
        c_squared(self.smoothness)
    }
}

/// `2 / (2s-1)!!`, with `(-1)!! = 1`.
pub fn c_squared(s: u32) -> f64 {
    let double_factorial: f64 = (1..=s).map(|r| (2 * r - 1) as f64).product();
    2.0 / double_factorial
}

fn check_closed_form(s: u32) -> Result<()> {
    if s > MAX_CLOSED_FORM_SMOOTHNESS {
        Err(Error::UnsupportedSmoothness { s, supported: SUPPORTED })
    } else {
        Ok(())
    }
}

fn check_public(s: u32) -> Result<()> {
    if s == 0 || s > MAX_CLOSED_FORM_SMOOTHNESS {
        Err(Error::UnsupportedSmoothness { s, supported: SUPPORTED_PUBLIC })
    } else {
        Ok(())
    }
}

/// Clamps `u` into `[-1, 1]` when it is within rounding slack of the
/// interval and rejects it otherwise.
pub fn clamp_unit<T: Scalar>(u: T) -> Result<T> {
    let one = T::one();
    if u.is_nan() || u.abs() > one + T::clamp_slack() {
        return Err(Error::Domain { value: u.to_f64_lossy() });
    }
    Ok(u.max(-one).min(one))
}

/// Closed-form `κ_s(u)` for `u` already in `[-1, 1]`.
///
/// With `θ = arccos u`, `π - θ` is evaluated as `arccos(-u)` and `sin θ` as
/// `sqrt((1-u)(1+u))` to avoid cancellation near the endpoints.
fn rf_unchecked<T: Scalar>(s: u32, u: T) -> T {
    let pi = T::PI();
    let phi = (-u).acos();
    let sin = ((T::one() - u) * (T::one() + u)).max(T::zero()).sqrt();
    match s {
        0 => phi / pi,
        1 => (u * phi + sin) / pi,
        2 => {
            let three = T::lit(3.0);
            (three * sin * u + phi * (T::one() + T::lit(2.0) * u * u)) / (three * pi)
        }
        3 => {
            let sin3 = sin * sin * sin;
            let poly = T::lit(9.0) * u + T::lit(6.0) * u * u * u;
            (T::lit(15.0) * sin - T::lit(11.0) * sin3 + phi * poly) / (T::lit(15.0) * pi)
        }
        _ => unreachable!("smoothness validated by caller"),
    }
}

/// `s² / (2s - 1)`: the factor relating `κ'_s` to `κ_{s-1}`.
fn derivative_factor<T: Scalar>(s: u32) -> T {
    T::lit((s * s) as f64 / (2 * s - 1) as f64)
}

fn rf_derivative_unchecked<T: Scalar>(s: u32, u: T) -> T {
    derivative_factor::<T>(s) * rf_unchecked(s - 1, u)
}

fn nt_unchecked<T: Scalar>(s: u32, u: T) -> T {
    u * rf_derivative_unchecked(s, u) + rf_unchecked(s, u)
}

/// Two-layer RF kernel `κ_s(u)` for `s ∈ {0, 1, 2, 3}`.
pub fn rf_closed<T: Scalar>(s: u32, u: T) -> Result<T> {
    check_closed_form(s)?;
    Ok(rf_unchecked(s, clamp_unit(u)?))
}

/// `κ'_s(u) = s²/(2s-1) · κ_{s-1}(u)`.
pub fn rf_derivative<T: Scalar>(s: u32, u: T) -> Result<T> {
    check_public(s)?;
    Ok(rf_derivative_unchecked(s, clamp_unit(u)?))
}

/// Two-layer NT kernel `κ_NT,s(u) = u · κ'_s(u) + κ_s(u)`.
pub fn nt_two_layer<T: Scalar>(s: u32, u: T) -> Result<T> {
    check_public(s)?;
    Ok(nt_unchecked(s, clamp_unit(u)?))
}

fn rf_deep_unchecked<T: Scalar>(s: u32, depth: u32, u: T) -> T {
    (2..depth).fold(rf_unchecked(s, u), |v, _| rf_unchecked(s, v))
}

fn nt_deep_unchecked<T: Scalar>(s: u32, depth: u32, u: T, recursion: NtRecursion) -> T {
    let factor = match recursion {
        NtRecursion::Scaled => T::lit(c_squared(s)),
        NtRecursion::Standard => T::one(),
    };
    let mut rf = rf_unchecked(s, u);
    let mut nt = nt_unchecked(s, u);
    for _ in 2..depth {
        let rf_next = rf_unchecked(s, rf);
        nt = factor * nt * rf_derivative_unchecked(s, rf) + rf_next;
        rf = rf_next;
    }
    nt
}

fn check_depth(depth: u32) -> Result<()> {
    if depth < 2 {
        Err(Error::config(format!("depth l = {depth} but kernels need l >= 2")))
    } else {
        Ok(())
    }
}

/// `κ^l_s(u)`: the two-layer RF map composed `l - 1` times.
pub fn rf_deep<T: Scalar>(s: u32, depth: u32, u: T) -> Result<T> {
    check_public(s)?;
    check_depth(depth)?;
    Ok(rf_deep_unchecked(s, depth, clamp_unit(u)?))
}

/// `κ^l_NT,s(u)` from the depth recursion with the given `c²` convention.
pub fn nt_deep<T: Scalar>(s: u32, depth: u32, u: T, recursion: NtRecursion) -> Result<T> {
    check_public(s)?;
    check_depth(depth)?;
    Ok(nt_deep_unchecked(s, depth, clamp_unit(u)?, recursion))
}

/// A function of the inner product `u = x·x'` that can be projected onto
/// Gegenbauer polynomials.
pub trait ZonalFunction<T: Scalar>: Sync {
    /// Value at `u ∈ [-1, 1]`; callers guarantee the range.
    fn value(&self, u: T) -> T;

    /// What produced the function, for spectrum provenance.
    fn provenance(&self) -> crate::spectral::Provenance {
        crate::spectral::Provenance::NumericalOther
    }
}

impl<T: Scalar, F: Fn(T) -> T + Sync> ZonalFunction<T> for F {
    fn value(&self, u: T) -> T {
        self(u)
    }
}

/// An evaluable RF or NT kernel of fixed smoothness, depth and dimension.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotProductKernel<T: Scalar> {
    spec: KernelSpec,
    recursion: NtRecursion,
    at_one: T,
}

impl<T: Scalar> DotProductKernel<T> {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        Self::with_recursion(spec, NtRecursion::default())
    }

    pub fn with_recursion(spec: KernelSpec, recursion: NtRecursion) -> Result<Self> {
        check_public(spec.smoothness)?;
        check_depth(spec.depth)?;
        let mut kernel = Self { spec, recursion, at_one: T::one() };
        kernel.at_one = kernel.eval_unchecked(T::one());
        Ok(kernel)
    }

    /// Two-layer kernel, the configuration used by the experiments.
    pub fn two_layer(family: KernelFamily, smoothness: u32, dim: usize) -> Result<Self> {
        Self::new(KernelSpec::two_layer(family, smoothness, dim)?)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn family(&self) -> KernelFamily {
        self.spec.family
    }

    pub fn smoothness(&self) -> u32 {
        self.spec.smoothness
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn recursion(&self) -> NtRecursion {
        self.recursion
    }

    /// `κ(1)`, the prior variance at every point of the sphere.
    pub fn value_at_one(&self) -> T {
        self.at_one
    }

    fn eval_unchecked(&self, u: T) -> T {
        let s = self.spec.smoothness;
        match (self.spec.family, self.spec.depth) {
            (KernelFamily::Rf, 2) => rf_unchecked(s, u),
            (KernelFamily::Nt, 2) => nt_unchecked(s, u),
            (KernelFamily::Rf, l) => rf_deep_unchecked(s, l, u),
            (KernelFamily::Nt, l) => nt_deep_unchecked(s, l, u, self.recursion),
        }
    }

    /// `κ(u)`; `u` within rounding slack of `[-1, 1]` is clamped.
    pub fn eval(&self, u: T) -> Result<T> {
        Ok(self.eval_unchecked(clamp_unit(u)?))
    }

    /// `κ(u)` with `u` clamped into `[-1, 1]` unconditionally. For inner
    /// products of points that were already validated as unit vectors.
    #[inline]
    pub fn eval_clamped(&self, u: T) -> T {
        self.eval_unchecked(u.max(-T::one()).min(T::one()))
    }

    /// `κ(x·x')` for two unit vectors.
    #[inline]
    pub fn between(&self, x: &[T], y: &[T]) -> T {
        self.eval_clamped(dot(x, y))
    }
}

impl<T: Scalar> ZonalFunction<T> for DotProductKernel<T> {
    fn value(&self, u: T) -> T {
        self.eval_clamped(u)
    }

    fn provenance(&self) -> crate::spectral::Provenance {
        match self.spec.family {
            KernelFamily::Rf => crate::spectral::Provenance::NumericalRf,
            KernelFamily::Nt => crate::spectral::Provenance::NumericalNt,
        }
    }
}

/// Checks that every point has unit norm within `T::norm_slack()`.
pub fn check_unit_points<T: Scalar>(points: &[Vec<T>]) -> Result<()> {
    for (index, p) in points.iter().enumerate() {
        check_unit(p, index)?;
    }
    Ok(())
}

pub(crate) fn check_unit<T: Scalar>(p: &[T], index: usize) -> Result<()> {
    let n = norm(p);
    if !((n - T::one()).abs() <= T::norm_slack()) {
        return Err(Error::NotUnitNorm { index, norm: n.to_f64_lossy() });
    }
    Ok(())
}

/// Gram matrix `[κ(x_i·x_j)]` of unit vectors. Symmetric, with `κ(1)` on
/// the diagonal.
pub fn gram<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>]) -> Result<Matrix<T>> {
    check_unit_points(points)?;
    Ok(gram_unchecked(kernel, points))
}

pub(crate) fn gram_unchecked<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>]) -> Matrix<T> {
    let n = points.len();
    let mut data = vec![T::zero(); n * n];
    data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = if i == j { kernel.value_at_one() } else { kernel.between(&points[i], &points[j]) };
        }
    });
    Matrix::from_row_major(n, n, data)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_PI, PI};

    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rf_closed_form_values() {
        assert_eq!(rf_closed(1, 1.0).unwrap(), 1.0);
        assert!(close(rf_closed(1, 0.0).unwrap(), FRAC_1_PI, 1e-15));
        assert!(close(rf_closed(2, 0.0).unwrap(), 1.0 / 6.0, 1e-15));
        assert!(close(rf_closed(3, 0.0).unwrap(), 4.0 / (15.0 * PI), 1e-15));
        assert!(close(rf_closed(0, 0.0).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn rf_endpoints() {
        for s in 1..=3 {
            assert!(close(rf_closed(s, 1.0).unwrap(), 1.0, 1e-14), "s={s}");
            assert!(close(rf_closed(s, -1.0).unwrap(), 0.0, 1e-15), "s={s}");
        }
        assert_eq!(rf_closed(0, -1.0).unwrap(), 0.0);
        assert_eq!(rf_closed(0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn unsupported_smoothness_is_rejected() {
        assert!(matches!(rf_closed(4, 0.0_f64), Err(Error::UnsupportedSmoothness { s: 4, .. })));
        assert!(matches!(nt_two_layer(0, 0.0_f64), Err(Error::UnsupportedSmoothness { .. })));
        assert!(DotProductKernel::<f64>::two_layer(KernelFamily::Rf, 5, 3).is_err());
    }

    #[test]
    fn domain_clamping() {
        assert_eq!(rf_closed(1, 1.0 + 5e-13).unwrap(), 1.0);
        assert!(matches!(rf_closed(1, 1.0 + 1e-9), Err(Error::Domain { .. })));
        assert!(matches!(rf_closed(1, f64::NAN), Err(Error::Domain { .. })));
        assert!(rf_closed(2, -1.0_f64 - 5e-13).unwrap().abs() < 1e-15);
    }

    #[test]
    fn derivative_values() {
        assert!(close(rf_derivative(1, 0.0).unwrap(), 0.5, 1e-15));
        assert!(close(rf_derivative(2, 0.0).unwrap(), 4.0 / 3.0 * FRAC_1_PI, 1e-15));
        assert!(close(rf_derivative(2, 1.0).unwrap(), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        for s in 1..=3 {
            for &u in &[-0.99_f64, -0.5, 0.0, 0.5, 0.99] {
                let fd = (rf_closed(s, u + h).unwrap() - rf_closed(s, u - h).unwrap()) / (2.0 * h);
                let exact = rf_derivative(s, u).unwrap();
                assert!((exact - fd).abs() / exact.abs().max(1.0) < 1e-6, "s={s} u={u}");
            }
        }
    }

    #[test]
    fn nt_two_layer_values() {
        assert!(close(nt_two_layer(1, 1.0).unwrap(), 2.0, 1e-15));
        assert!(close(nt_two_layer(1, 0.0).unwrap(), FRAC_1_PI, 1e-15));
        assert!(nt_two_layer(1, -1.0_f64).unwrap().abs() < 1e-15);
        // Printed ReLU form (u/π)(π - arccos u) + κ_1(u).
        let u: f64 = 0.5;
        let printed = u / PI * (PI - u.acos()) + (u * (PI - u.acos()) + (1.0 - u * u).sqrt()) / PI;
        assert!(close(nt_two_layer(1, u).unwrap(), printed, 1e-15));
    }

    #[test]
    fn deep_recursion() {
        for s in 1..=3 {
            assert!(close(rf_deep(s, 3, 1.0).unwrap(), 1.0, 1e-14));
            assert_eq!(rf_deep(s, 2, 0.3).unwrap(), rf_closed(s, 0.3).unwrap());
            assert_eq!(nt_deep(s, 2, 0.3, NtRecursion::Scaled).unwrap(), nt_two_layer(s, 0.3).unwrap());
        }
        assert!(close(rf_deep(1, 3, 0.0).unwrap(), rf_closed(1, FRAC_1_PI).unwrap(), 1e-15));
        assert!(rf_deep(1, 1, 0.0_f64).is_err());
    }

    #[test]
    fn nt_recursion_variants_differ_by_c_squared() {
        let u = 0.4;
        let rf2 = rf_closed(1, u).unwrap();
        let nt2 = nt_two_layer(1, u).unwrap();
        let d = rf_derivative(1, rf2).unwrap();
        let rf3 = rf_closed(1, rf2).unwrap();
        let scaled = nt_deep(1, 3, u, NtRecursion::Scaled).unwrap();
        let standard = nt_deep(1, 3, u, NtRecursion::Standard).unwrap();
        assert!(close(scaled, 2.0 * nt2 * d + rf3, 1e-15));
        assert!(close(standard, nt2 * d + rf3, 1e-15));
    }

    #[test]
    fn c_squared_normalization() {
        assert_eq!(c_squared(0), 2.0);
        assert_eq!(c_squared(1), 2.0);
        assert!(close(c_squared(2), 2.0 / 3.0, 1e-16));
        assert!(close(c_squared(3), 2.0 / 15.0, 1e-16));
    }

    #[test]
    fn kernel_spec_validation() {
        assert!(KernelSpec::new(KernelFamily::Nt, 1, 1, 3).is_err());
        assert!(KernelSpec::new(KernelFamily::Nt, 1, 2, 1).is_err());
        assert!(KernelSpec::new(KernelFamily::Rf, 0, 2, 3).is_ok());
        assert!(KernelSpec::new(KernelFamily::Nt, 0, 2, 3).is_err());
    }

    #[test]
    fn gram_examples() {
        let rf = DotProductKernel::<f64>::two_layer(KernelFamily::Rf, 1, 3).unwrap();
        let g = gram(&rf, &[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]]).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert!(g.get(0, 1).abs() < 1e-15);
        let nt = DotProductKernel::<f64>::two_layer(KernelFamily::Nt, 1, 3).unwrap();
        let g = gram(&nt, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(close(g.get(0, 0), 2.0, 1e-15));
        assert!(close(g.get(1, 0), FRAC_1_PI, 1e-15));
        assert_eq!(g.get(0, 1), g.get(1, 0));
        let single = gram(&nt, &[vec![0.6, 0.8, 0.0]]).unwrap();
        assert_eq!(single.get(0, 0), nt.value_at_one());
    }

    #[test]
    fn gram_rejects_non_unit_points() {
        let rf = DotProductKernel::<f64>::two_layer(KernelFamily::Rf, 1, 2).unwrap();
        let err = gram(&rf, &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotUnitNorm { index: 1, .. }));
    }

    #[test]
    fn single_precision_kernels() {
        let k = DotProductKernel::<f32>::two_layer(KernelFamily::Nt, 2, 3).unwrap();
        let v64 = nt_two_layer(2, 0.3_f64).unwrap();
        assert!((k.eval(0.3_f32).unwrap() as f64 - v64).abs() < 1e-6);
        assert!((rf_closed(3, 0.0_f32).unwrap() as f64 - 4.0 / (15.0 * PI)).abs() < 1e-7);
    }
}
