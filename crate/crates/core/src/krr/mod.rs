//! Kernel ridge regression on the sphere with posterior variances,
//! confidence bands, information gain and effective dimension.

mod greedy;

pub use greedy::{greedy_max_variance, variance_sum_check, GreedyTrace, VarianceSumCheck};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_unit, check_unit_points, gram_unchecked, DotProductKernel};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{norm, Scalar};

/// `n` points drawn uniformly from `S^{d-1}` by normalizing Gaussian
/// vectors. Deterministic in `seed`.
pub fn sample_sphere<T>(d: usize, n: usize, seed: u64) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    sample_sphere_stream(d, n, seed, 0)
}

/// As [`sample_sphere`], drawing from an independent ChaCha stream.
pub fn sample_sphere_stream<T>(d: usize, n: usize, seed: u64, stream: u64) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    if d < 2 {
        return Err(Error::config(format!("sphere sampling needs d >= 2, got {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: Vec<T> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = norm(&v);
        if r > T::epsilon() {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    Ok(out)
}

/// Training inputs on `S^{d-1}` with observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalDataset<T> {
    d: usize,
    inputs: Vec<Vec<T>>,
    values: Vec<T>,
    noise_scale: T,
}

impl<T: Scalar> SphericalDataset<T> {
    pub fn new(d: usize, inputs: Vec<Vec<T>>, values: Vec<T>, noise_scale: T) -> Result<Self> {
        if inputs.len() != values.len() {
            return Err(Error::config(format!("{} inputs but {} values", inputs.len(), values.len())));
        }
        if let Some((i, x)) = inputs.iter().enumerate().find(|(_, x)| x.len() != d) {
            return Err(Error::config(format!("input {i} has dimension {} instead of {d}", x.len())));
        }
        if !(noise_scale >= T::zero()) {
            return Err(Error::config("noise scale must be nonnegative"));
        }
        check_unit_points(&inputs)?;
        Ok(Self { d, inputs, values, noise_scale })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn noise_scale(&self) -> T {
        self.noise_scale
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::config(format!("regularization lambda = {lambda} must be positive")));
    }
    Ok(())
}

/// Posterior of kernel ridge regression: `f̂(x) = k(x)ᵀ α` with
/// `α = (K + λ²I)⁻¹ Y` and `σ²(x) = κ(1) - k(x)ᵀ (K + λ²I)⁻¹ k(x)`.
#[derive(Debug, Clone)]
pub struct FittedRegressor<T: Scalar> {
    kernel: DotProductKernel<T>,
    inputs: Vec<Vec<T>>,
    lambda: T,
    factor: Option<Cholesky<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> FittedRegressor<T> {
    /// The `n = 0` model: mean 0 and variance `κ(1)` everywhere.
    pub fn prior(kernel: DotProductKernel<T>, lambda: T) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { kernel, inputs: Vec::new(), lambda, factor: None, weights: Vec::new() })
    }

    /// Factors `K + λ²I` (with the jitter policy of
    /// [`Cholesky::factor_with_jitter`]) and solves for the dual weights.
    pub fn fit(kernel: DotProductKernel<T>, data: &SphericalDataset<T>, lambda: T) -> Result<Self> {
        check_lambda(lambda)?;
        if data.is_empty() {
            return Err(Error::config("cannot fit on an empty dataset; use FittedRegressor::prior"));
        }
        if data.dim() != kernel.dim() {
            return Err(Error::config(format!("data in d = {} but kernel built for d = {}", data.dim(), kernel.dim())));
        }
        let gram = gram_unchecked(&kernel, data.inputs()).with_diagonal_shift(lambda * lambda);
        let factor = Cholesky::factor_with_jitter(&gram)?;
        let weights = factor.solve(data.values());
        Ok(Self { kernel, inputs: data.inputs().to_vec(), lambda, factor: Some(factor), weights })
    }

    pub fn kernel(&self) -> &DotProductKernel<T> {
        &self.kernel
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<T>] {
        &self.inputs
    }

    /// Dual weights `α`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Factor of `K + λ²I`, absent for the prior.
    pub fn factor(&self) -> Option<&Cholesky<T>> {
        self.factor.as_ref()
    }

    fn kernel_vector(&self, x: &[T]) -> Vec<T> {
        self.inputs.iter().map(|xi| self.kernel.between(x, xi)).collect()
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.kernel.dim() {
            return Err(Error::config(format!("query has dimension {} instead of {}", x.len(), self.kernel.dim())));
        }
        check_unit(x, 0)
    }

    pub fn predict_mean(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        Ok(self.mean_unchecked(x))
    }

    pub(crate) fn mean_unchecked(&self, x: &[T]) -> T {
        self.inputs
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (xi, &a)| acc + a * self.kernel.between(x, xi))
    }

    /// Posterior variance, clamped into `[0, κ(1)]`.
    pub fn predict_variance(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        Ok(self.variance_unchecked(x))
    }

    fn variance_unchecked(&self, x: &[T]) -> T {
        let prior = self.kernel.value_at_one();
        let Some(factor) = &self.factor else {
            return prior;
        };
        let z = factor.forward(&self.kernel_vector(x));
        let explained = z.iter().fold(T::zero(), |a, &v| a + v * v);
        (prior - explained).max(T::zero()).min(prior)
    }

    /// Means at many points, computed in parallel.
    pub fn predict_means(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        check_unit_points(xs)?;
        Ok(xs.par_iter().map(|x| self.mean_unchecked(x)).collect())
    }

    /// Variances at many points, computed in parallel.
    pub fn predict_variances(&self, xs: &[Vec<T>]) -> Result<Vec<T>> {
        check_unit_points(xs)?;
        Ok(xs.par_iter().map(|x| self.variance_unchecked(x)).collect())
    }
}

/// Norm bound `B`, sub-Gaussian noise scale `R` and failure probability `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    pub norm_bound: f64,
    pub noise: f64,
    pub delta: f64,
}

impl ConfidenceParams {
    pub fn new(norm_bound: f64, noise: f64, delta: f64) -> Result<Self> {
        let p = Self { norm_bound, noise, delta };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("failure probability delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.norm_bound > 0.0) {
            return Err(Error::config("norm bound B must be positive"));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::config("noise scale R must be nonnegative"));
        }
        Ok(())
    }

    /// `β(δ) = B + (R/λ) √(2 log(1/δ))`.
    pub fn beta(&self, lambda: f64) -> f64 {
        self.norm_bound + self.noise / lambda * (2.0 * (1.0 / self.delta).ln()).sqrt()
    }
}

/// Half-width `β(δ) σ(x)` of the confidence band at `x`.
pub fn confidence_band<T: Scalar>(model: &FittedRegressor<T>, x: &[T], params: &ConfidenceParams) -> Result<T> {
    params.validate()?;
    let sigma = model.predict_variance(x)?.sqrt();
    Ok(T::lit(params.beta(model.lambda().to_f64_lossy())) * sigma)
}

/// `½ log det(I + K/λ²)` from a Cholesky factor.
pub fn information_gain<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>], lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    check_unit_points(points)?;
    if points.is_empty() {
        return Ok(T::zero());
    }
    Ok(scaled_log_det(kernel, points, lambda)? * T::lit(0.5))
}

fn scaled_log_det<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>], lambda: T) -> Result<T> {
    let inv = T::one() / (lambda * lambda);
    let gram = gram_unchecked(kernel, points);
    let n = points.len();
    let a = Matrix::from_fn(n, n, |i, j| gram.get(i, j) * inv + if i == j { T::one() } else { T::zero() });
    Ok(Cholesky::factor_with_jitter(&a)?.log_det().max(T::zero()))
}

/// `Tr(K (K + λ²I)⁻¹) = n - λ² Tr((K + λ²I)⁻¹)`.
pub fn effective_dimension<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>], lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    check_unit_points(points)?;
    if points.is_empty() {
        return Ok(T::zero());
    }
    let gram = gram_unchecked(kernel, points).with_diagonal_shift(lambda * lambda);
    let factor = Cholesky::factor_with_jitter(&gram)?;
    let n = T::lit(points.len() as f64);
    Ok((n - lambda * lambda * factor.inverse_trace()).max(T::zero()).min(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoGainReport {
    pub n: usize,
    pub info_gain: f64,
    pub effective_dim: f64,
    pub lambda: f64,
}

pub fn info_gain_report<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>], lambda: T) -> Result<InfoGainReport> {
    Ok(InfoGainReport {
        n: points.len(),
        info_gain: information_gain(kernel, points, lambda)?.to_f64_lossy(),
        effective_dim: effective_dimension(kernel, points, lambda)?.to_f64_lossy(),
        lambda: lambda.to_f64_lossy(),
    })
}
