use serde::{Deserialize, Serialize};

use super::spectrum::SpectrumTable;
use crate::error::{Error, Result};
use crate::experiments::fit_loglog_slope;
use crate::scalar::Scalar;

/// Eigenvalues below this are treated as numerically zero in decay fits.
pub const FIT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    All,
}

impl Parity {
    pub fn admits(self, degree: usize) -> bool {
        match self {
            Parity::Even => degree % 2 == 0,
            Parity::Odd => degree % 2 == 1,
            Parity::All => true,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "all" => Ok(Parity::All),
            other => Err(Error::config(format!("unknown parity `{other}` (expected even, odd or all)"))),
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Degrees that entered the fit.
    pub used: usize,
}

/// Default fit range `[max(9, 2s+3), 59]`.
pub fn default_degree_range(s: u32) -> (usize, usize) {
    (9.max(2 * s as usize + 3), 59)
}

/// Least-squares slope of `log λ̃_i` against `log i` over the degrees in
/// `range` of the chosen parity with `λ̃_i > 1e-14`. Needs five such degrees.
pub fn eigendecay_fit<T: Scalar>(table: &SpectrumTable<T>, parity: Parity, range: (usize, usize)) -> Result<DecayFit> {
    let (lo, hi) = range;
    if lo == 0 || lo > hi {
        return Err(Error::config(format!("invalid degree range [{lo}, {hi}]")));
    }
    let hi = hi.min(table.max_degree());
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=hi)
        .filter(|&i| parity.admits(i))
        .map(|i| (i as f64, table.eigenvalue(i).to_f64_lossy()))
        .filter(|&(_, l)| l > FIT_FLOOR)
        .unzip();
    if xs.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, found: xs.len() });
    }
    let fit = fit_loglog_slope(&xs, &ys)?;
    Ok(DecayFit { slope: fit.slope, intercept: fit.intercept, r_squared: fit.r_squared, used: xs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub degrees: usize,
}

/// Extremes of `λ̃_i^num / λ̃_i^den` over the parity-filtered degree range.
pub fn rkhs_equivalence_ratio<T: Scalar>(
    numerator: &SpectrumTable<T>,
    denominator: &SpectrumTable<T>,
    range: (usize, usize),
    parity: Parity,
) -> Result<RatioSummary> {
    if numerator.dim() != denominator.dim() {
        return Err(Error::config(format!(
            "spectra live on different spheres (d = {} and d = {})",
            numerator.dim(),
            denominator.dim()
        )));
    }
    let (lo, hi) = range;
    let top = numerator.max_degree().min(denominator.max_degree());
    if lo > hi || hi > top {
        return Err(Error::config(format!("degree range [{lo}, {hi}] not covered by both spectra (max {top})")));
    }
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    let mut degrees = 0;
    for i in (lo..=hi).filter(|&i| parity.admits(i)) {
        let den = denominator.eigenvalue(i).to_f64_lossy();
        if !(den > 0.0) {
            return Err(Error::ZeroEigenvalue { degree: i });
        }
        let r = numerator.eigenvalue(i).to_f64_lossy() / den;
        min_ratio = min_ratio.min(r);
        max_ratio = max_ratio.max(r);
        degrees += 1;
    }
    if degrees == 0 {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    Ok(RatioSummary { min_ratio, max_ratio, degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{matern_spectrum, MaternSpec, Provenance};

    #[test]
    fn matern_slope() {
        let t = matern_spectrum::<f64>(&MaternSpec { nu: 0.5, lengthscale: 1.0, d: 3 }, 60).unwrap();
        let fit = eigendecay_fit(&t, Parity::All, (10, 60)).unwrap();
        assert!((fit.slope + 3.0).abs() < 0.1, "{fit:?}");
        assert_eq!(fit.used, 51);
    }

    #[test]
    fn too_few_degrees() {
        let t = SpectrumTable::from_eigenvalues(3, vec![1.0, 0.5, 0.0, 0.2, 0.0, 0.1, 0.0, 0.05], Provenance::NumericalOther)
            .unwrap();
        assert!(matches!(eigendecay_fit(&t, Parity::Even, (1, 7)), Err(Error::InsufficientData { needed: 5, found: 0 })));
    }

    #[test]
    fn ratio_with_itself() {
        let t = matern_spectrum::<f64>(&MaternSpec { nu: 1.5, lengthscale: 1.0, d: 4 }, 30).unwrap();
        let r = rkhs_equivalence_ratio(&t, &t, (0, 30), Parity::All).unwrap();
        assert_eq!((r.min_ratio, r.max_ratio), (1.0, 1.0));
    }

    #[test]
    fn ratio_rejects_zero_denominator() {
        let a = SpectrumTable::from_eigenvalues(3, vec![1.0, 1.0, 1.0], Provenance::NumericalOther).unwrap();
        let b = SpectrumTable::from_eigenvalues(3, vec![1.0, 0.0, 1.0], Provenance::NumericalOther).unwrap();
        assert!(matches!(rkhs_equivalence_ratio(&a, &b, (0, 2), Parity::All), Err(Error::ZeroEigenvalue { degree: 1 })));
        assert!(rkhs_equivalence_ratio(&a, &b, (0, 2), Parity::Even).is_ok());
    }

    #[test]
    fn default_range() {
        assert_eq!(default_degree_range(1), (9, 59));
        assert_eq!(default_degree_range(4), (11, 59));
    }
}
