//! Ground-truth functions in the RKHS of a kernel:
//! `g(x) = k̂(x)ᵀ (K̂ + δ²I)⁻¹ Ŷ` with `Ŷ ~ N(0, K̂)` on random anchors,
//! normalized by its range over a sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_unit_points, gram_unchecked, DotProductKernel};
use crate::krr::sample_sphere_stream;
use crate::linalg::Cholesky;
use crate::scalar::dot;

pub const STREAM_ANCHORS: u64 = 0;
pub const STREAM_ANCHOR_VALUES: u64 = 1;
pub const STREAM_RANGE: u64 = 2;

/// Slack on the certified norm chain `‖g‖² <= ‖Ŷ‖²/δ²`.
const CERTIFICATE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub anchors: usize,
    pub ridge: f64,
    pub range_sample: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { anchors: 100, ridge: 0.01, range_sample: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticFunction {
    kernel: DotProductKernel<f64>,
    anchors: Vec<Vec<f64>>,
    anchor_values: Vec<f64>,
    weights: Vec<f64>,
    ridge: f64,
    range_normalizer: f64,
    norm_sq: f64,
    norm_bound: f64,
}

impl SyntheticFunction {
    /// Random anchors and anchor values drawn from `seed`.
    pub fn generate(kernel: DotProductKernel<f64>, cfg: &SyntheticConfig, seed: u64) -> Result<Self> {
        if cfg.anchors == 0 || cfg.range_sample < 2 {
            return Err(Error::config("synthetic function needs anchors and a range sample of at least 2 points"));
        }
        let d = kernel.dim();
        let anchors = sample_sphere_stream::<f64>(d, cfg.anchors, seed, STREAM_ANCHORS)?;
        let gram = gram_unchecked(&kernel, &anchors);
        let root = Cholesky::factor_with_jitter(&gram)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_ANCHOR_VALUES);
        let z: Vec<f64> = (0..cfg.anchors).map(|_| StandardNormal.sample(&mut rng)).collect();
        let l = root.lower();
        let values: Vec<f64> = (0..cfg.anchors).map(|i| dot(&l.row(i)[..=i], &z[..=i])).collect();
        let range_points = sample_sphere_stream::<f64>(d, cfg.range_sample, seed, STREAM_RANGE)?;
        Self::from_anchor_values(kernel, anchors, values, cfg.ridge, &range_points)
    }

    /// Builds `g` from given anchors and values; the range is estimated on
    /// `range_points`.
    pub fn from_anchor_values(
        kernel: DotProductKernel<f64>,
        anchors: Vec<Vec<f64>>,
        anchor_values: Vec<f64>,
        ridge: f64,
        range_points: &[Vec<f64>],
    ) -> Result<Self> {
        if !(ridge > 0.0) {
            return Err(Error::config(format!("anchor ridge delta^2 = {ridge} must be positive")));
        }
        if anchors.len() != anchor_values.len() || anchors.is_empty() {
            return Err(Error::config("anchors and anchor values must be non-empty and of equal length"));
        }
        check_unit_points(&anchors)?;
        check_unit_points(range_points)?;
        let gram = gram_unchecked(&kernel, &anchors);
        let factor = Cholesky::factor_with_jitter(&gram.with_diagonal_shift(ridge))?;
        let weights = factor.solve(&anchor_values);
        // ‖g‖² = αᵀ K̂ α.
        let norm_sq = dot(&weights, &gram.mat_vec(&weights));
        let norm_bound = dot(&anchor_values, &anchor_values) / ridge;
        if norm_sq > norm_bound + CERTIFICATE_SLACK {
            return Err(Error::NormCertificate { norm_sq, bound: norm_bound });
        }
        let mut g = Self {
            kernel,
            anchors,
            anchor_values,
            weights,
            ridge,
            range_normalizer: 1.0,
            norm_sq,
            norm_bound,
        };
        let values = g.evaluate_raw(range_points);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let range = max - min;
        if !(range > 1e-12) {
            return Err(Error::DegenerateFunction { range });
        }
        g.range_normalizer = range;
        Ok(g)
    }

    fn evaluate_raw(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.par_iter()
            .map(|x| self.anchors.iter().zip(&self.weights).map(|(a, w)| w * self.kernel.between(x, a)).sum())
            .collect()
    }

    /// `f(x) = g(x) / range` at each point.
    pub fn evaluate(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_unit_points(xs)?;
        Ok(self.evaluate_raw(xs).into_iter().map(|v| v / self.range_normalizer).collect())
    }

    pub fn kernel(&self) -> &DotProductKernel<f64> {
        &self.kernel
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn anchor_values(&self) -> &[f64] {
        &self.anchor_values
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn range_normalizer(&self) -> f64 {
        self.range_normalizer
    }

    /// `‖g‖²` in the RKHS, before range normalization.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Certified bound `‖Ŷ‖²/δ²` on [`Self::norm_sq`].
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// RKHS norm of the normalized function `f`.
    pub fn normalized_norm(&self) -> f64 {
        self.norm_sq.sqrt() / self.range_normalizer
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;

    fn kernel() -> DotProductKernel<f64> {
        DotProductKernel::two_layer(KernelFamily::Nt, 1, 3).unwrap()
    }

    #[test]
    fn default_construction() {
        let cfg = SyntheticConfig { range_sample: 2000, ..Default::default() };
        let f = SyntheticFunction::generate(kernel(), &cfg, 3).unwrap();
        assert!(f.norm_sq() <= f.norm_bound());
        let range_points = sample_sphere_stream::<f64>(3, 2000, 3, STREAM_RANGE).unwrap();
        let v = f.evaluate(&range_points).unwrap();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproducible() {
        let cfg = SyntheticConfig { range_sample: 500, ..Default::default() };
        let a = SyntheticFunction::generate(kernel(), &cfg, 9).unwrap();
        let b = SyntheticFunction::generate(kernel(), &cfg, 9).unwrap();
        assert_eq!(a.anchor_values(), b.anchor_values());
        assert_eq!(a.range_normalizer(), b.range_normalizer());
    }

    #[test]
    fn zero_values_are_degenerate() {
        let anchors = sample_sphere_stream::<f64>(3, 10, 1, 0).unwrap();
        let range = sample_sphere_stream::<f64>(3, 100, 1, 1).unwrap();
        let err = SyntheticFunction::from_anchor_values(kernel(), anchors, vec![0.0; 10], 0.01, &range).unwrap_err();
        assert!(matches!(err, Error::DegenerateFunction { .. }));
    }
}
