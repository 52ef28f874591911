//! Sequential max-variance data collection over a candidate grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_unit_points, gram_unchecked, DotProductKernel};
use crate::linalg::Cholesky;
use crate::scalar::{dot, Scalar};

/// Candidates updated per parallel work item.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    /// Grid index chosen at each step.
    pub indices: Vec<usize>,
    /// `σ²_{j-1}(x_j)`: posterior variance of the chosen point just before
    /// it was added.
    pub variances: Vec<f64>,
    /// Cumulative `Σ_{i<=j} ½ log(1 + σ²_{i-1}(x_i)/λ²)`.
    pub info_gain_path: Vec<f64>,
}

/// Picks `x_j = argmax_x σ²_{j-1}(x)` over `candidates` for `n` steps,
/// breaking ties by the lowest grid index. Points may be chosen again.
///
/// Variances are downdated with the incremental factor
/// `v_j(x) = (k(x, x_j) - Σ_{m<j} v_m(x) v_m(x_j)) / sqrt(σ²_{j-1}(x_j) + λ²)`,
/// `σ²_j(x) = σ²_{j-1}(x) - v_j(x)²`.
pub fn greedy_max_variance<T: Scalar>(
    kernel: &DotProductKernel<T>,
    candidates: &[Vec<T>],
    n: usize,
    lambda: T,
) -> Result<GreedyTrace> {
    if candidates.is_empty() {
        return Err(Error::config("greedy selection needs a non-empty candidate grid"));
    }
    if !(lambda > T::zero()) {
        return Err(Error::config(format!("regularization lambda = {lambda} must be positive")));
    }
    check_unit_points(candidates)?;
    let count = candidates.len();
    let lambda2 = lambda * lambda;
    let half = T::lit(0.5);

    let mut variance = vec![kernel.value_at_one(); count];
    // Row c holds v_0(x_c), ..., v_{n-1}(x_c).
    let mut factors = vec![T::zero(); count * n];
    let mut trace = GreedyTrace {
        indices: Vec::with_capacity(n),
        variances: Vec::with_capacity(n),
        info_gain_path: Vec::with_capacity(n),
    };
    let mut gain = T::zero();

    for j in 0..n {
        let mut best = 0;
        for (c, &v) in variance.iter().enumerate() {
            if v > variance[best] {
                best = c;
            }
        }
        let sigma2 = variance[best];
        gain = gain + half * (T::one() + sigma2 / lambda2).ln();
        trace.indices.push(best);
        trace.variances.push(sigma2.to_f64_lossy());
        trace.info_gain_path.push(gain.to_f64_lossy());
        if j + 1 == n {
            break;
        }

        let pivot_row: Vec<T> = factors[best * n..best * n + j].to_vec();
        let scale = T::one() / (sigma2 + lambda2).sqrt();
        let chosen = &candidates[best];
        factors.par_chunks_mut(n * CHUNK).zip(variance.par_chunks_mut(CHUNK)).enumerate().for_each(
            |(chunk, (rows, vars))| {
                for (offset, (row, var)) in rows.chunks_mut(n).zip(vars.iter_mut()).enumerate() {
                    let c = chunk * CHUNK + offset;
                    let cov = kernel.between(&candidates[c], chosen) - dot(&row[..j], &pivot_row);
                    let v = cov * scale;
                    row[j] = v;
                    *var = (*var - v * v).max(T::zero());
                }
            },
        );
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSumCheck {
    /// `Σ_i σ²_{i-1}(x_i)`.
    pub lhs: f64,
    /// `(2 / log(1 + λ⁻²)) · I`.
    pub rhs: f64,
    pub info_gain: f64,
}

impl VarianceSumCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// Sum of sequential posterior variances of `points` against the bound
/// `(2 / log(1 + λ⁻²)) · ½ log det(I + K/λ²)`.
///
/// The pivots of the Cholesky factor of `K + λ²I` are `σ²_{i-1}(x_i) + λ²`,
/// so both sides come from one factorization.
pub fn variance_sum_check<T: Scalar>(kernel: &DotProductKernel<T>, points: &[Vec<T>], lambda: T) -> Result<VarianceSumCheck> {
    if !(lambda > T::zero()) {
        return Err(Error::config(format!("regularization lambda = {lambda} must be positive")));
    }
    check_unit_points(points)?;
    let lambda2 = lambda.to_f64_lossy().powi(2);
    if points.is_empty() {
        return Ok(VarianceSumCheck { lhs: 0.0, rhs: 0.0, info_gain: 0.0 });
    }
    let gram = gram_unchecked(kernel, points).with_diagonal_shift(lambda * lambda);
    let factor = Cholesky::factor_with_jitter(&gram)?;
    let mut lhs = 0.0;
    let mut info_gain = 0.0;
    for i in 0..points.len() {
        let pivot = factor.lower().get(i, i).to_f64_lossy().powi(2);
        lhs += (pivot - lambda2).max(0.0);
        info_gain += 0.5 * (pivot / lambda2).ln();
    }
    let rhs = 2.0 / (1.0 + 1.0 / lambda2).ln() * info_gain;
    Ok(VarianceSumCheck { lhs, rhs, info_gain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;
    use crate::krr::{information_gain, sample_sphere, FittedRegressor, SphericalDataset};

    fn nt1() -> DotProductKernel<f64> {
        DotProductKernel::two_layer(KernelFamily::Nt, 1, 3).unwrap()
    }

    #[test]
    fn first_pick_is_index_zero() {
        let grid = sample_sphere::<f64>(3, 50, 1).unwrap();
        let t = greedy_max_variance(&nt1(), &grid, 5, 1.0).unwrap();
        assert_eq!(t.indices[0], 0);
        assert_eq!(t.variances[0], 2.0);
        assert!(t.variances.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn matches_brute_force_posterior() {
        let grid = sample_sphere::<f64>(3, 20, 2).unwrap();
        let k = nt1();
        let t = greedy_max_variance(&k, &grid, 8, 0.5).unwrap();
        let mut chosen = Vec::new();
        for (step, &idx) in t.indices.iter().enumerate() {
            let variances: Vec<f64> = if chosen.is_empty() {
                vec![2.0; grid.len()]
            } else {
                let data = SphericalDataset::new(3, chosen.clone(), vec![0.0; chosen.len()], 0.0).unwrap();
                FittedRegressor::fit(k, &data, 0.5).unwrap().predict_variances(&grid).unwrap()
            };
            let max = variances.iter().cloned().fold(f64::MIN, f64::max);
            assert!((variances[idx] - max).abs() < 1e-10, "step {step}");
            assert!((t.variances[step] - variances[idx]).abs() < 1e-10);
            chosen.push(grid[idx].clone());
        }
    }

    #[test]
    fn chain_rule_matches_log_det() {
        let grid = sample_sphere::<f64>(3, 200, 3).unwrap();
        let k = nt1();
        let t = greedy_max_variance(&k, &grid, 40, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = t.indices.iter().map(|&i| grid[i].clone()).collect();
        let direct = information_gain(&k, &pts, 1.0).unwrap();
        let chain = *t.info_gain_path.last().unwrap();
        assert!((direct - chain).abs() < 1e-6 * direct);
    }

    #[test]
    fn variance_sum_single_point() {
        // With κ(1) = 2 the first term alone exceeds its share of the bound:
        // 2 > (2 / log 2) · ½ log 3 ≈ 1.585.
        let c = variance_sum_check(&nt1(), &[vec![1.0, 0.0, 0.0]], 1.0).unwrap();
        assert!((c.lhs - 2.0).abs() < 1e-14);
        let rhs = 2.0 / 2f64.ln() * 0.5 * 3f64.ln();
        assert!((c.rhs - rhs).abs() < 1e-14);
        assert!(!c.holds(1e-8));
        // κ(1) = 1 makes the single-point case an equality.
        let rf = DotProductKernel::two_layer(KernelFamily::Rf, 1, 3).unwrap();
        let c = variance_sum_check(&rf, &[vec![1.0, 0.0, 0.0]], 1.0).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-14 && (c.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn variance_sum_large_lambda() {
        // Each term obeys x <= log(1 + x/λ²) / log(1 + 1/λ²) when x <= 1.
        let grid = sample_sphere::<f64>(3, 30, 6).unwrap();
        let rf = DotProductKernel::two_layer(KernelFamily::Rf, 2, 3).unwrap();
        let c = variance_sum_check(&rf, &grid, 100.0).unwrap();
        assert!(c.holds(1e-8));
        assert!(c.lhs > 29.0);
    }

    #[test]
    fn variance_sum_holds_on_long_greedy_run() {
        let grid = sample_sphere::<f64>(3, 2048, 1).unwrap();
        let t = greedy_max_variance(&nt1(), &grid, 256, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = t.indices.iter().map(|&i| grid[i].clone()).collect();
        assert!(variance_sum_check(&nt1(), &pts, 1.0).unwrap().holds(1e-8));
    }

    #[test]
    fn variance_sum_agrees_with_trace() {
        let grid = sample_sphere::<f64>(4, 300, 8).unwrap();
        let k = DotProductKernel::two_layer(KernelFamily::Nt, 2, 4).unwrap();
        let t = greedy_max_variance(&k, &grid, 32, 0.5).unwrap();
        let pts: Vec<Vec<f64>> = t.indices.iter().map(|&i| grid[i].clone()).collect();
        let c = variance_sum_check(&k, &pts, 0.5).unwrap();
        let lhs: f64 = t.variances.iter().sum();
        assert!((c.lhs - lhs).abs() < 1e-8 * lhs);
        assert!((c.info_gain - t.info_gain_path[31]).abs() < 1e-8 * c.info_gain);
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(greedy_max_variance(&nt1(), &[], 3, 1.0).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let grid = sample_sphere::<f64>(3, 500, 9).unwrap();
        let k = nt1();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| greedy_max_variance(&k, &grid, 30, 1.0).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
