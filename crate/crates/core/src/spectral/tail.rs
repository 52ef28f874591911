//! Tail sums `Σ_{i>M} λ̃_i N_{d,i} Γ(α) / (2π^α)` of two-layer kernels.
//!
//! Since `|C_i^α(u)| <= C_i^α(1)`, the tail bounds the sup-norm error of the
//! truncated expansion. Terms are summed numerically up to `M_max` and the
//! rest is replaced by a power-law remainder fitted on the last octave.

use serde::{Deserialize, Serialize};

use super::gegenbauer::{multiplicity, surface_factor};
use super::quadrature::GegenbauerBasis;
use crate::error::{Error, Result};
use crate::experiments::fit_loglog_slope;
use crate::kernels::{DotProductKernel, KernelFamily};

pub const DEFAULT_MAX_DEGREE: usize = 400;

/// Below this fraction of the other parity's mass, a parity is treated as
/// identically zero when fitting the remainder.
const PARITY_THRESHOLD: f64 = 1e-3;

/// How the remainder beyond `M_max` was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    /// Decay exponent of the terms predicted by the eigendecay.
    pub theoretical_exponent: f64,
    /// Exponent fitted on the last octave, if enough terms were usable.
    pub fitted_exponent: Option<f64>,
    /// Exponent actually used.
    pub exponent: f64,
    /// Fraction of degrees carrying mass (0.5 under a parity constraint).
    pub live_fraction: f64,
    /// Envelope constant `max term(i) · i^p` over the last octave.
    pub constant: f64,
    pub remainder: f64,
}

#[derive(Debug, Clone)]
pub struct TailEstimator {
    max_degree: usize,
    terms: Vec<f64>,
    fit: RemainderFit,
}

impl TailEstimator {
    /// Tail estimator for the two-layer kernel `(family, s)` on `S^{d-1}`
    /// with `M_max = 400`.
    pub fn new(family: KernelFamily, s: u32, d: usize) -> Result<Self> {
        Self::with_max_degree(family, s, d, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(family: KernelFamily, s: u32, d: usize, max_degree: usize) -> Result<Self> {
        if max_degree < 16 {
            return Err(Error::config(format!("M_max = {max_degree} is too small for a remainder fit")));
        }
        let kernel = DotProductKernel::<f64>::two_layer(family, s, d)?;
        let basis = GegenbauerBasis::<f64>::new(d, max_degree)?;
        let coeffs = basis.project(&kernel);
        let at_one = basis.values_at_one();
        let terms: Vec<f64> = coeffs.iter().zip(&at_one).map(|(b, c)| (b * c).max(0.0)).collect();
        // Terms scale as λ̃_i N_{d,i} ~ i^{-p}.
        let exponent = match family {
            KernelFamily::Nt => 2.0 * s as f64,
            KernelFamily::Rf => 2.0 * s as f64 + 2.0,
        };
        Self::from_terms(terms, exponent)
    }

    /// Estimator from precomputed terms `λ̃_i N_{d,i} Γ(α)/(2π^α)` for
    /// `i = 0..=M_max` and the theoretical decay exponent of those terms.
    pub fn from_terms(terms: Vec<f64>, theoretical_exponent: f64) -> Result<Self> {
        if terms.len() < 17 {
            return Err(Error::config("tail estimator needs terms up to degree 16 at least"));
        }
        let max_degree = terms.len() - 1;
        let fit = fit_remainder(&terms, theoretical_exponent);
        Ok(Self { max_degree, terms, fit })
    }

    /// Terms from a spectrum: `λ̃_i N_{d,i} Γ(α)/(2π^α)`.
    pub fn terms_from_spectrum(table: &super::SpectrumTable<f64>) -> Vec<f64> {
        let factor = surface_factor(table.dim());
        table
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, l)| l * multiplicity(table.dim(), i).expect("d >= 3") as f64 * factor)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn remainder_fit(&self) -> &RemainderFit {
        &self.fit
    }

    /// `Σ_{i>M} term(i)`: numerical up to `M_max`, fitted remainder beyond.
    pub fn tail_sum(&self, m: usize) -> Result<f64> {
        if m >= self.max_degree {
            return Err(Error::config(format!("tail requested at M = {m} but M_max = {}", self.max_degree)));
        }
        Ok(self.terms[m + 1..].iter().sum::<f64>() + self.fit.remainder)
    }
}

fn fit_remainder(terms: &[f64], theoretical: f64) -> RemainderFit {
    let m_max = terms.len() - 1;
    let lo = m_max / 2 + 1;
    let octave: Vec<(usize, f64)> = (lo..=m_max).map(|i| (i, terms[i])).collect();
    let parity_mass = |p: usize| octave.iter().filter(|(i, _)| i % 2 == p).map(|(_, t)| t).sum::<f64>();
    let (even, odd) = (parity_mass(0), parity_mass(1));
    let (live, live_fraction): (Vec<(usize, f64)>, f64) = if even.min(odd) < PARITY_THRESHOLD * even.max(odd) {
        let dominant = if even >= odd { 0 } else { 1 };
        (octave.iter().copied().filter(|(i, _)| i % 2 == dominant).collect(), 0.5)
    } else {
        (octave.clone(), 1.0)
    };
    let positive: Vec<(usize, f64)> = live.into_iter().filter(|&(_, t)| t > 0.0).collect();

    let fitted = if positive.len() >= 5 {
        let xs: Vec<f64> = positive.iter().map(|&(i, _)| i as f64).collect();
        let ys: Vec<f64> = positive.iter().map(|&(_, t)| t).collect();
        fit_loglog_slope(&xs, &ys).ok().map(|f| -f.slope)
    } else {
        None
    };
    let mut exponent = fitted.map_or(theoretical, |p| p.min(theoretical));
    if exponent <= 1.0 {
        exponent = theoretical;
    }
    let constant = positive.iter().map(|&(i, t)| t * (i as f64).powf(exponent)).fold(0.0, f64::max);
    let remainder = live_fraction * constant * (m_max as f64).powf(1.0 - exponent) / (exponent - 1.0);
    RemainderFit { theoretical_exponent: theoretical, fitted_exponent: fitted, exponent, live_fraction, constant, remainder }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_remainder() {
        // term(i) = i^{-3} on all degrees: remainder ≈ M_max^{-2}/2.
        let terms: Vec<f64> = (0..=200).map(|i| if i == 0 { 1.0 } else { (i as f64).powi(-3) }).collect();
        let t = TailEstimator::from_terms(terms, 3.0).unwrap();
        let fit = t.remainder_fit();
        assert_eq!(fit.live_fraction, 1.0);
        assert!((fit.exponent - 3.0).abs() < 1e-9);
        let exact: f64 = (201..2_000_000).map(|i| (i as f64).powi(-3)).sum();
        assert!(fit.remainder >= exact && fit.remainder < 1.02 * exact);
    }

    #[test]
    fn parity_detection() {
        let terms: Vec<f64> = (0..=200).map(|i| if i % 2 == 0 { 1.0 / (1.0 + i as f64).powi(2) } else { 1e-18 }).collect();
        let t = TailEstimator::from_terms(terms, 2.0).unwrap();
        assert_eq!(t.remainder_fit().live_fraction, 0.5);
    }

    #[test]
    fn tail_rejects_large_m_and_is_nonnegative() {
        let t = TailEstimator::with_max_degree(KernelFamily::Nt, 1, 3, 64).unwrap();
        assert!(t.tail_sum(63).unwrap() >= 0.0);
        assert!(t.tail_sum(64).is_err());
    }

    #[test]
    fn terms_match_spectrum_route() {
        let k = DotProductKernel::<f64>::two_layer(KernelFamily::Rf, 1, 4).unwrap();
        let basis = GegenbauerBasis::new(4, 40).unwrap();
        let table = super::super::mercer_spectrum(&k, 4, 40, &basis).unwrap();
        let via_table = TailEstimator::terms_from_spectrum(&table);
        let coeffs = basis.project(&k);
        for (i, (a, c)) in via_table.iter().zip(basis.values_at_one()).enumerate() {
            let b = coeffs[i] * c;
            assert!((a - b.max(0.0)).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-18, "degree {i}");
        }
    }
}
