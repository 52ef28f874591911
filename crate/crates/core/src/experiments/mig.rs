//! Growth of the greedy information gain with the number of samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::error_rate::{power_of_two_grid, validate_grid, FitWindow};
use super::exponents::theoretical_mig_exponent;
use super::slope::fit_loglog_slope;
use crate::error::{Error, Result};
use crate::kernels::{DotProductKernel, KernelFamily};
use crate::krr::{effective_dimension, greedy_max_variance, sample_sphere};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MigGrowthConfig {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub lambda: f64,
    pub candidate_grid_size: usize,
    pub seed: u64,
    pub fit_window: FitWindow,
}

impl MigGrowthConfig {
    /// `n = 2..1024`, `λ = 1`, 4096 candidates, fit on the upper half.
    pub fn new(family: KernelFamily, s: u32, d: usize) -> Self {
        Self {
            family,
            s,
            d,
            n_grid: power_of_two_grid(10),
            lambda: 1.0,
            candidate_grid_size: 4096,
            seed: 42,
            fit_window: FitWindow::UpperHalf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.n_grid, self.fit_window)?;
        if !(self.lambda > 0.0) {
            return Err(Error::config("regularization lambda must be positive"));
        }
        if self.candidate_grid_size == 0 {
            return Err(Error::config("candidate grid must be non-empty"));
        }
        DotProductKernel::<f64>::two_layer(self.family, self.s, self.d)?;
        Ok(())
    }
}

/// One grid point of the growth curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigPoint {
    pub n: usize,
    pub info_gain: f64,
    pub effective_dim: f64,
    pub sum_variance: f64,
    pub bound_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigGrowthReport {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub lambda: f64,
    pub fit_window: FitWindow,
    /// Greedy information gains: lower bounds on the maximal information gain.
    pub points: Vec<MigPoint>,
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub theoretical_exponent: f64,
}

pub fn mig_growth_experiment(cfg: &MigGrowthConfig) -> Result<MigGrowthReport> {
    cfg.validate()?;
    let kernel = DotProductKernel::<f64>::two_layer(cfg.family, cfg.s, cfg.d)?;
    let candidates = sample_sphere::<f64>(cfg.d, cfg.candidate_grid_size, cfg.seed)?;
    let n_max = *cfg.n_grid.last().expect("validated grid");
    let trace = greedy_max_variance(&kernel, &candidates, n_max, cfg.lambda)?;
    let selected: Vec<Vec<f64>> = trace.indices.iter().map(|&i| candidates[i].clone()).collect();
    let scale = 2.0 / (1.0 + 1.0 / (cfg.lambda * cfg.lambda)).ln();

    let effective: Vec<f64> = cfg
        .n_grid
        .par_iter()
        .map(|&n| effective_dimension(&kernel, &selected[..n], cfg.lambda))
        .collect::<Result<_>>()?;
    let points: Vec<MigPoint> = cfg
        .n_grid
        .iter()
        .zip(effective)
        .map(|(&n, effective_dim)| {
            let info_gain = trace.info_gain_path[n - 1];
            MigPoint {
                n,
                info_gain,
                effective_dim,
                sum_variance: trace.variances[..n].iter().sum(),
                bound_rhs: scale * info_gain,
            }
        })
        .collect();
    let window = cfg.fit_window.select(&points);
    let xs: Vec<f64> = window.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.info_gain).collect();
    let fit = fit_loglog_slope(&xs, &ys)?;
    Ok(MigGrowthReport {
        family: cfg.family,
        s: cfg.s,
        d: cfg.d,
        lambda: cfg.lambda,
        fit_window: cfg.fit_window,
        points,
        fitted_exponent: fit.slope,
        r_squared: fit.r_squared,
        theoretical_exponent: theoretical_mig_exponent(cfg.family, cfg.s, cfg.d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MigGrowthConfig {
        let mut cfg = MigGrowthConfig::new(KernelFamily::Nt, 1, 3);
        cfg.n_grid = power_of_two_grid(7);
        cfg.candidate_grid_size = 512;
        cfg
    }

    #[test]
    fn gain_is_monotone_and_bounded() {
        let r = mig_growth_experiment(&small()).unwrap();
        assert!(r.points.windows(2).all(|w| w[1].info_gain >= w[0].info_gain));
        assert!(r.points.iter().all(|p| p.bound_rhs > 0.0 && p.sum_variance > 0.0));
        assert!(r.points.iter().all(|p| p.effective_dim <= p.n as f64));
        assert!(r.fitted_exponent > 0.0);
    }

    #[test]
    fn larger_lambda_gives_smaller_gain() {
        let a = mig_growth_experiment(&small()).unwrap();
        let mut cfg = small();
        cfg.lambda = 2.0;
        let b = mig_growth_experiment(&cfg).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!(q.info_gain < p.info_gain);
        }
    }
}
