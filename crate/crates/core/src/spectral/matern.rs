use serde::{Deserialize, Serialize};

use super::spectrum::{Provenance, SpectrumTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Matérn kernel on `S^{d-1}` with smoothness `ν` and lengthscale `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternSpec {
    pub nu: f64,
    pub lengthscale: f64,
    pub d: usize,
}

impl MaternSpec {
    pub fn new(nu: f64, lengthscale: f64, d: usize) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::config(format!("Matern smoothness nu = {nu} must be positive")));
        }
        if !(lengthscale > 0.0) || !lengthscale.is_finite() {
            return Err(Error::config(format!("Matern lengthscale = {lengthscale} must be positive")));
        }
        if d < 3 {
            return Err(Error::UnsupportedDimension { d });
        }
        Ok(Self { nu, lengthscale, d })
    }

    /// `λ̃_i = (2ν/ℓ² + i(i+d-2))^{-(ν+(d-1)/2)}`.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        let d = self.d as f64;
        let i = i as f64;
        let base = 2.0 * self.nu / (self.lengthscale * self.lengthscale) + i * (i + d - 2.0);
        base.powf(-(self.nu + (d - 1.0) / 2.0))
    }
}

/// Analytic Matérn eigenvalues for degrees `0..=M`.
pub fn matern_spectrum<T: Scalar>(spec: &MaternSpec, max_degree: usize) -> Result<SpectrumTable<T>> {
    let spec = MaternSpec::new(spec.nu, spec.lengthscale, spec.d)?;
    let eigenvalues = (0..=max_degree).map(|i| T::lit(spec.eigenvalue(i))).collect();
    SpectrumTable::from_eigenvalues(spec.d, eigenvalues, Provenance::AnalyticMatern)
}
