//! Sup-norm error of kernel ridge regression against a synthetic RKHS
//! function as the training set grows, and its log-log exponent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponents::theoretical_error_exponent;
use super::slope::fit_loglog_slope;
use super::synthetic::{SyntheticConfig, SyntheticFunction};
use crate::error::{Error, Result};
use crate::kernels::{DotProductKernel, KernelFamily};
use crate::krr::{sample_sphere_stream, FittedRegressor, SphericalDataset};

const STREAM_EVAL: u64 = 3;
const STREAM_TRAIN: u64 = 4;
const STREAM_NOISE: u64 = 5;
/// Independent (non-nested) training draws use streams from here on.
const STREAM_TRAIN_INDEPENDENT: u64 = 64;

/// Grid points that enter the exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitWindow {
    /// Every grid point.
    #[default]
    Full,
    /// The larger half of the grid (`ceil(len/2)` points).
    UpperHalf,
}

impl FitWindow {
    pub fn select<T>(self, values: &[T]) -> &[T] {
        match self {
            FitWindow::Full => values,
            FitWindow::UpperHalf => &values[values.len() / 2..],
        }
    }
}

impl std::str::FromStr for FitWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FitWindow::Full),
            "upper-half" => Ok(FitWindow::UpperHalf),
            other => Err(Error::config(format!("unknown fit window `{other}` (expected full or upper-half)"))),
        }
    }
}

/// `n = 2^1, ..., 2^k`.
pub fn power_of_two_grid(max_exponent: u32) -> Vec<usize> {
    (1..=max_exponent).map(|i| 1usize << i).collect()
}

pub(crate) fn validate_grid(grid: &[usize], window: FitWindow) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 {
        return Err(Error::config("n grid must be non-empty with positive sizes"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("n grid must be strictly increasing"));
    }
    if window.select(grid).len() < 3 {
        return Err(Error::config("exponent fit window needs at least 3 grid points"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorRateConfig {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub eval_sample: usize,
    pub synthetic: SyntheticConfig,
    pub train_lambda2: f64,
    pub noise_scale: f64,
    pub nested: bool,
    pub fit_window: FitWindow,
}

impl ErrorRateConfig {
    /// `n = 2..2^11`, 5 repetitions, 10⁴ evaluation points.
    pub fn new(family: KernelFamily, s: u32, d: usize) -> Self {
        Self {
            family,
            s,
            d,
            n_grid: power_of_two_grid(11),
            repetitions: 5,
            master_seed: 42,
            eval_sample: 10_000,
            synthetic: SyntheticConfig::default(),
            train_lambda2: 0.01,
            noise_scale: 0.0,
            nested: true,
            fit_window: FitWindow::Full,
        }
    }

    /// `n = 2..2^13` with 20 repetitions.
    pub fn full_scale(mut self) -> Self {
        self.n_grid = power_of_two_grid(13);
        self.repetitions = 20;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.n_grid, self.fit_window)?;
        if self.repetitions == 0 {
            return Err(Error::config("at least one repetition is required"));
        }
        if self.eval_sample == 0 {
            return Err(Error::config("evaluation sample must be non-empty"));
        }
        if !(self.train_lambda2 > 0.0) {
            return Err(Error::config("training regularization lambda^2 must be positive"));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::config("noise scale must be nonnegative"));
        }
        DotProductKernel::<f64>::two_layer(self.family, self.s, self.d)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub seed: u64,
    pub sup_errors: Vec<f64>,
    pub exponent: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionFailure {
    pub repetition: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub fit_window: FitWindow,
    pub repetitions: Vec<RepetitionResult>,
    pub failures: Vec<RepetitionFailure>,
    pub mean_exponent: f64,
    pub exponent_std: f64,
    pub theoretical_exponent: f64,
}

impl ErrorRateReport {
    /// `n,rep,sup_error` rows.
    pub fn rows(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for rep in &self.repetitions {
            for (&n, &e) in self.n_grid.iter().zip(&rep.sup_errors) {
                out.push((n, rep.repetition, e));
            }
        }
        out
    }

    /// Mean sup-error per grid point over successful repetitions.
    pub fn mean_errors(&self) -> Vec<f64> {
        let reps = self.repetitions.len().max(1) as f64;
        (0..self.n_grid.len()).map(|k| self.repetitions.iter().map(|r| r.sup_errors[k]).sum::<f64>() / reps).collect()
    }
}

/// Mean and sample standard deviation.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_repetition(cfg: &ErrorRateConfig, kernel: DotProductKernel<f64>, seed: u64) -> Result<(Vec<f64>, f64, f64)> {
    let truth = SyntheticFunction::generate(kernel, &cfg.synthetic, seed)?;
    let eval = sample_sphere_stream::<f64>(cfg.d, cfg.eval_sample, seed, STREAM_EVAL)?;
    let target = truth.evaluate(&eval)?;
    let n_max = *cfg.n_grid.last().expect("validated grid");
    let pool = if cfg.nested { sample_sphere_stream::<f64>(cfg.d, n_max, seed, STREAM_TRAIN)? } else { Vec::new() };
    let lambda = cfg.train_lambda2.sqrt();

    let mut errors = Vec::with_capacity(cfg.n_grid.len());
    for (k, &n) in cfg.n_grid.iter().enumerate() {
        let inputs = if cfg.nested {
            pool[..n].to_vec()
        } else {
            sample_sphere_stream::<f64>(cfg.d, n, seed, STREAM_TRAIN_INDEPENDENT + k as u64)?
        };
        let mut values = truth.evaluate(&inputs)?;
        if cfg.noise_scale > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_NOISE + if cfg.nested { 0 } else { STREAM_TRAIN_INDEPENDENT + k as u64 });
            for v in values.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v += cfg.noise_scale * e;
            }
        }
        let data = SphericalDataset::new(cfg.d, inputs, values, cfg.noise_scale)?;
        let model = FittedRegressor::fit(kernel, &data, lambda)?;
        let predictions = model.predict_means(&eval)?;
        let sup = predictions.iter().zip(&target).map(|(p, t)| (p - t).abs()).fold(0.0, f64::max);
        errors.push(sup);
    }
    let xs: Vec<f64> = cfg.fit_window.select(&cfg.n_grid).iter().map(|&n| n as f64).collect();
    let ys = cfg.fit_window.select(&errors);
    let fit = fit_loglog_slope(&xs, ys)?;
    Ok((errors, fit.slope, fit.r_squared))
}

/// Runs all repetitions (in parallel, seeds `master_seed + r`). Failed
/// repetitions are recorded and excluded while they stay under 20%.
pub fn error_rate_experiment(cfg: &ErrorRateConfig) -> Result<ErrorRateReport> {
    cfg.validate()?;
    let kernel = DotProductKernel::<f64>::two_layer(cfg.family, cfg.s, cfg.d)?;
    let outcomes: Vec<_> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.master_seed.wrapping_add(r as u64);
            (r, seed, run_repetition(cfg, kernel, seed))
        })
        .collect();

    let mut repetitions = Vec::new();
    let mut failures = Vec::new();
    for (repetition, seed, outcome) in outcomes {
        match outcome {
            Ok((sup_errors, exponent, r_squared)) => {
                repetitions.push(RepetitionResult { repetition, seed, sup_errors, exponent, r_squared })
            }
            Err(e) => failures.push(RepetitionFailure { repetition, seed, message: e.to_string() }),
        }
    }
    if failures.len() * 5 >= cfg.repetitions {
        let first = &failures[0];
        return Err(Error::Experiment(format!(
            "{} of {} repetitions failed (first: repetition {}: {})",
            failures.len(),
            cfg.repetitions,
            first.repetition,
            first.message
        )));
    }
    let exponents: Vec<f64> = repetitions.iter().map(|r| r.exponent).collect();
    let (mean_exponent, exponent_std) = mean_std(&exponents);
    Ok(ErrorRateReport {
        family: cfg.family,
        s: cfg.s,
        d: cfg.d,
        n_grid: cfg.n_grid.clone(),
        fit_window: cfg.fit_window,
        repetitions,
        failures,
        mean_exponent,
        exponent_std,
        theoretical_exponent: theoretical_error_exponent(cfg.family, cfg.s, cfg.d)?,
    })
}
