use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gegenbauer::{addition_constant, gegenbauer_at_one, multiplicity};
use super::quadrature::GegenbauerBasis;
use crate::error::{Error, Result};
use crate::kernels::ZonalFunction;
use crate::scalar::Scalar;

/// Where the eigenvalues of a [`SpectrumTable`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "numerical-NT")]
    NumericalNt,
    #[serde(rename = "numerical-RF")]
    NumericalRf,
    #[serde(rename = "analytic-Matern")]
    AnalyticMatern,
    /// Projection of an arbitrary zonal function.
    #[serde(rename = "numerical")]
    NumericalOther,
}

/// Per-degree Mercer eigenvalues `λ̃_i` and multiplicities `N_{d,i}` for
/// degrees `0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable<T> {
    d: usize,
    eigenvalues: Vec<T>,
    multiplicities: Vec<u128>,
    provenance: Provenance,
    clamped: usize,
}

impl<T: Scalar> SpectrumTable<T> {
    /// Assembles a table from per-degree eigenvalues; negative entries are
    /// rejected.
    pub fn from_eigenvalues(d: usize, eigenvalues: Vec<T>, provenance: Provenance) -> Result<Self> {
        if d < 3 {
            return Err(Error::UnsupportedDimension { d });
        }
        if let Some((i, v)) = eigenvalues.iter().enumerate().find(|(_, v)| !(**v >= T::zero())) {
            return Err(Error::SpectralAccuracy(format!("eigenvalue {v} at degree {i} is negative")));
        }
        let multiplicities = (0..eigenvalues.len()).map(|i| multiplicity(d, i)).collect::<Result<_>>()?;
        Ok(Self { d, eigenvalues, multiplicities, provenance, clamped: 0 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, degree: usize) -> T {
        self.eigenvalues[degree]
    }

    pub fn multiplicities(&self) -> &[u128] {
        &self.multiplicities
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Number of small negative quadrature eigenvalues that were set to zero.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }

    /// Gegenbauer coefficients `λ̃_i c_{i,d}`.
    pub fn gegenbauer_coefficients(&self) -> Vec<T> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| l * T::lit(addition_constant(self.d, i).expect("d >= 3")))
            .collect()
    }

    /// Truncated series `Σ_{i<=m} λ̃_i c_{i,d} C_i^α(1)`.
    pub fn mass(&self, m: usize) -> T {
        let alpha = T::lit((self.d as f64 - 2.0) / 2.0);
        let coeffs = self.gegenbauer_coefficients();
        coeffs
            .iter()
            .take(m + 1)
            .enumerate()
            .map(|(i, &b)| b * gegenbauer_at_one(alpha, i))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Writes `degree,eigenvalue,multiplicity` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::report::spectrum_table(self).write_csv(out)
    }

    /// JSON document with `d`, `max_degree`, provenance, clamp diagnostics
    /// and the per-degree rows.
    pub fn to_json(&self) -> serde_json::Value {
        let degrees: Vec<serde_json::Value> = self
            .eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .enumerate()
            .map(|(i, (l, n))| {
                serde_json::json!({
                    "degree": i,
                    "eigenvalue": l.to_f64_lossy(),
                    "multiplicity": u64::try_from(*n).unwrap_or(u64::MAX),
                })
            })
            .collect();
        serde_json::json!({
            "d": self.d,
            "max_degree": self.max_degree(),
            "provenance": self.provenance,
            "clamped_negative_count": self.clamped,
            "degrees": degrees,
        })
    }
}

/// Mercer eigenvalues of a zonal kernel on `S^{d-1}` for degrees `0..=M`.
///
/// `b_i = ∫ κ C_i w / ∫ C_i² w` and `λ̃_i = b_i / c_{i,d}`. Negatives within
/// `max(1e-10, 100 ε)` of the largest eigenvalue magnitude are set to zero
/// and counted; larger ones, or a truncated mass above `κ(1) + 1e-6`,
/// are reported as accuracy failures.
pub fn mercer_spectrum<T, F>(kernel: &F, d: usize, max_degree: usize, basis: &GegenbauerBasis<T>) -> Result<SpectrumTable<T>>
where
    T: Scalar,
    F: ZonalFunction<T> + ?Sized,
{
    if d < 3 {
        return Err(Error::UnsupportedDimension { d });
    }
    if basis.dim() != d {
        return Err(Error::config(format!("basis built for d = {} but spectrum requested for d = {d}", basis.dim())));
    }
    if basis.max_degree() < max_degree {
        return Err(Error::config(format!(
            "basis covers degrees up to {} but M = {max_degree} was requested",
            basis.max_degree()
        )));
    }
    let coeffs = basis.project(kernel);
    let mut eigenvalues: Vec<T> = coeffs
        .iter()
        .take(max_degree + 1)
        .enumerate()
        .map(|(i, &b)| b / T::lit(addition_constant(d, i).expect("d >= 3")))
        .collect();

    let reference = eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let tolerance = reference * T::lit(1e-10).max(T::epsilon() * T::lit(100.0));
    let mut clamped = 0;
    for (i, v) in eigenvalues.iter_mut().enumerate() {
        if *v < T::zero() {
            if -*v <= tolerance {
                *v = T::zero();
                clamped += 1;
            } else {
                return Err(Error::SpectralAccuracy(format!(
                    "eigenvalue {} at degree {i} is negative beyond roundoff (largest magnitude {})",
                    v.to_f64_lossy(),
                    reference.to_f64_lossy()
                )));
            }
        }
    }

    let mut table = SpectrumTable::from_eigenvalues(d, eigenvalues, kernel.provenance())?;
    table.clamped = clamped;

    let at_one = kernel.value(T::one());
    let mass = table.mass(max_degree);
    let slack = T::lit(1e-6).max(at_one.abs() * T::epsilon() * T::lit(100.0));
    if mass > at_one + slack {
        return Err(Error::SpectralAccuracy(format!(
            "truncated mass {} exceeds kappa(1) = {}",
            mass.to_f64_lossy(),
            at_one.to_f64_lossy()
        )));
    }
    Ok(table)
}

/// Truncated expansion `Σ_{i<=M} λ̃_i c_{i,d} C_i^α(u)`.
pub fn reconstruct<T: Scalar>(spectrum: &SpectrumTable<T>, u: T) -> T {
    let alpha = T::lit((spectrum.d as f64 - 2.0) / 2.0);
    let coeffs = spectrum.gegenbauer_coefficients();
    let two = T::lit(2.0);
    let mut prev = T::one();
    let mut cur = two * alpha * u;
    let mut total = coeffs[0];
    if coeffs.len() > 1 {
        total = total + coeffs[1] * cur;
    }
    for (k, &b) in coeffs.iter().enumerate().skip(2) {
        let kf = T::lit(k as f64);
        let next = (two * (kf + alpha - T::one()) * u * cur - (kf + two * alpha - two) * prev) / kf;
        prev = cur;
        cur = next;
        total = total + b * cur;
    }
    total
}

/// Eigenvalues in decreasing order, each `λ̃_i` repeated `N_{d,i}` times.
pub fn flatten_spectrum<T: Scalar>(table: &SpectrumTable<T>) -> Result<Vec<T>> {
    let total: u128 = table.multiplicities.iter().sum();
    let len = usize::try_from(total)
        .ok()
        .filter(|&n| n <= 1 << 32)
        .ok_or_else(|| Error::config(format!("flattened spectrum would hold {total} entries")))?;
    let mut out = Vec::with_capacity(len);
    for (&l, &n) in table.eigenvalues.iter().zip(&table.multiplicities) {
        out.extend(std::iter::repeat(l).take(n as usize));
    }
    out.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{DotProductKernel, KernelFamily};

    #[test]
    fn linear_kernel_has_pure_degree_one_spectrum() {
        let basis = GegenbauerBasis::<f64>::new(3, 10).unwrap();
        let t = mercer_spectrum(&|u: f64| u, 3, 10, &basis).unwrap();
        let c1 = addition_constant(3, 1).unwrap();
        assert!((t.eigenvalue(1) * c1 - 1.0).abs() < 1e-13);
        for i in (0..=10).filter(|&i| i != 1) {
            assert!(t.eigenvalue(i).abs() < 1e-13, "degree {i}");
        }
        assert!((reconstruct(&t, 0.7) - 0.7).abs() < 1e-8);
    }

    #[test]
    fn nt_reconstruction_close_to_kernel() {
        let k = DotProductKernel::<f64>::two_layer(KernelFamily::Nt, 1, 3).unwrap();
        let basis = GegenbauerBasis::new(3, 60).unwrap();
        let t = mercer_spectrum(&k, 3, 60, &basis).unwrap();
        assert_eq!(t.provenance(), Provenance::NumericalNt);
        assert!((reconstruct(&t, 0.0) - std::f64::consts::FRAC_1_PI).abs() < 1e-2);
        assert!(t.mass(60) <= 2.0 + 1e-6);
    }

    #[test]
    fn two_layer_parity_structure() {
        // The polynomial part u·κ'_s contributes a single extra degree, so
        // both RF and NT kernels have the parity of s+1 as the dominant one.
        for (family, s) in [(KernelFamily::Rf, 1), (KernelFamily::Nt, 1), (KernelFamily::Nt, 2)] {
            let k = DotProductKernel::<f64>::two_layer(family, s, 3).unwrap();
            let basis = GegenbauerBasis::new(3, 60).unwrap();
            let t = mercer_spectrum(&k, 3, 60, &basis).unwrap();
            for i in (2 * s as usize + 3..=60).filter(|i| (i + s as usize) % 2 == 0) {
                assert!(t.eigenvalue(i) < 1e-6 * t.eigenvalue(i - 1), "{family} s={s} degree {i}");
            }
        }
    }

    #[test]
    fn flatten_orders_and_repeats() {
        let t = SpectrumTable::from_eigenvalues(3, vec![2.0, 1.0], Provenance::NumericalOther).unwrap();
        assert_eq!(flatten_spectrum(&t).unwrap(), vec![2.0, 1.0, 1.0, 1.0]);
        let t = SpectrumTable::from_eigenvalues(3, vec![1.0, 0.0, 0.5], Provenance::NumericalOther).unwrap();
        assert_eq!(flatten_spectrum(&t).unwrap(), vec![1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn csv_and_json_output() {
        let t = SpectrumTable::from_eigenvalues(3, vec![1.0, 0.25], Provenance::AnalyticMatern).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "degree,eigenvalue,multiplicity\r\n0,1,1\r\n1,0.25,3\r\n");
        let j = t.to_json();
        assert_eq!(j["provenance"], "analytic-Matern");
        assert_eq!(j["max_degree"], 1);
        assert_eq!(j["clamped_negative_count"], 0);
    }

    #[test]
    fn rejects_mismatched_basis() {
        let basis = GegenbauerBasis::<f64>::new(4, 10).unwrap();
        assert!(mercer_spectrum(&|u: f64| u, 3, 10, &basis).is_err());
        assert!(mercer_spectrum(&|u: f64| u, 4, 11, &basis).is_err());
    }

    #[test]
    fn single_precision_spectrum() {
        let k = DotProductKernel::<f32>::two_layer(KernelFamily::Rf, 1, 3).unwrap();
        let basis = GegenbauerBasis::<f32>::new(3, 20).unwrap();
        let t = mercer_spectrum(&k, 3, 20, &basis).unwrap();
        let k64 = DotProductKernel::<f64>::two_layer(KernelFamily::Rf, 1, 3).unwrap();
        let t64 = mercer_spectrum(&k64, 3, 20, &GegenbauerBasis::new(3, 20).unwrap()).unwrap();
        for i in 0..=4 {
            assert!((t.eigenvalue(i) as f64 - t64.eigenvalue(i)).abs() < 1e-5, "degree {i}");
        }
    }
}
