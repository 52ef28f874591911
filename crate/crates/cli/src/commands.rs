//! Resolved parameters and execution for each subcommand.

use std::path::PathBuf;

use ntk_spectra::experiments::{
    error_rate_experiment, mig_growth_experiment, ErrorRateConfig, MigGrowthConfig,
};
use ntk_spectra::kernels::{check_unit_points, DotProductKernel, KernelFamily, KernelSpec, NtRecursion};
use ntk_spectra::krr::{
    effective_dimension, greedy_max_variance, info_gain_report, sample_sphere, variance_sum_check, InfoGainReport,
};
use ntk_spectra::report::{self, fmt_float, Table};
use ntk_spectra::scalar::dot;
use ntk_spectra::spectral::{
    default_degree_range, eigendecay_fit, matern_spectrum, mercer_spectrum, rkhs_equivalence_ratio, GegenbauerBasis,
    MaternSpec, Parity,
};
use ntk_spectra::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// What a command produced: the JSON payload, its tabular view and an
/// optional tidy table for plotting.
pub struct Outcome {
    pub payload: Value,
    pub table: Table,
    pub plot: Option<Table>,
}

impl Outcome {
    fn new(payload: impl Serialize, table: Table) -> Result<Self> {
        Ok(Self { payload: serde_json::to_value(payload)?, table, plot: None })
    }
}

fn kernel(family: KernelFamily, s: u32, depth: u32, d: usize, recursion: NtRecursion) -> Result<DotProductKernel<f64>> {
    DotProductKernel::with_recursion(KernelSpec::new(family, s, depth, d)?, recursion)
}

fn spectrum_for(
    family: KernelFamily,
    s: u32,
    depth: u32,
    d: usize,
    max_degree: usize,
    recursion: NtRecursion,
) -> Result<ntk_spectra::Spectrum64> {
    let k = kernel(family, s, depth, d, recursion)?;
    let basis = GegenbauerBasis::new(d, max_degree)?;
    mercer_spectrum(&k, d, max_degree, &basis)
}

/// `(max(9, 2s+3), 59)` capped by the computed degrees.
fn degree_range(s: u32, max_degree: usize, lo: Option<usize>, hi: Option<usize>) -> (usize, usize) {
    let (dlo, dhi) = default_degree_range(s);
    (lo.unwrap_or(dlo), hi.unwrap_or(dhi.min(max_degree)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalParams {
    pub family: KernelFamily,
    pub s: u32,
    pub l: u32,
    pub d: usize,
    pub recursion: NtRecursion,
    pub u: Vec<f64>,
    /// CSV of point pairs, one pair per row: `x_1..x_d, y_1..y_d`.
    pub points: Option<PathBuf>,
}

impl Default for KernelEvalParams {
    fn default() -> Self {
        Self { family: KernelFamily::Nt, s: 1, l: 2, d: 3, recursion: NtRecursion::Scaled, u: Vec::new(), points: None }
    }
}

fn read_point_pairs(path: &PathBuf, d: usize) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::config(format!("cannot read point pairs {}: {e}", path.display())))?;
    let mut us = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let vals: Vec<f64> = record
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| Error::config(format!("row {}: `{c}` is not a number", line + 1))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * d {
            return Err(Error::config(format!("row {}: expected {} values for d = {d}, found {}", line + 1, 2 * d, vals.len())));
        }
        let pair = vec![vals[..d].to_vec(), vals[d..].to_vec()];
        check_unit_points(&pair)?;
        us.push(dot(&pair[0], &pair[1]));
    }
    Ok(us)
}

pub fn kernel_eval(p: &KernelEvalParams) -> Result<Outcome> {
    let k = kernel(p.family, p.s, p.l, p.d, p.recursion)?;
    let mut us = p.u.clone();
    if let Some(path) = &p.points {
        us.extend(read_point_pairs(path, p.d)?);
    }
    if us.is_empty() {
        return Err(Error::config("kernel-eval needs --u values or a --points file"));
    }
    let values: Vec<f64> = us.iter().map(|&u| k.eval(u)).collect::<Result<_>>()?;
    let mut table = Table::new(&["u", "value"]);
    for (&u, &v) in us.iter().zip(&values) {
        table.push(vec![fmt_float(u), fmt_float(v)]);
    }
    let rows: Vec<Value> = us.iter().zip(&values).map(|(u, v)| json!({"u": u, "value": v})).collect();
    Outcome::new(json!({ "values": rows }), table)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub family: KernelFamily,
    pub s: u32,
    pub l: u32,
    pub d: usize,
    pub recursion: NtRecursion,
    pub max_degree: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self { family: KernelFamily::Nt, s: 1, l: 2, d: 3, recursion: NtRecursion::Scaled, max_degree: 60 }
    }
}

pub fn spectrum(p: &SpectrumParams) -> Result<Outcome> {
    let table = spectrum_for(p.family, p.s, p.l, p.d, p.max_degree, p.recursion)?;
    Ok(Outcome { payload: table.to_json(), table: report::spectrum_table(&table), plot: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigendecayParams {
    pub family: KernelFamily,
    pub s: u32,
    pub l: u32,
    pub d: usize,
    pub recursion: NtRecursion,
    pub max_degree: usize,
    pub parity: Parity,
    pub degree_min: Option<usize>,
    pub degree_max: Option<usize>,
}

impl Default for EigendecayParams {
    fn default() -> Self {
        Self {
            family: KernelFamily::Nt,
            s: 1,
            l: 2,
            d: 3,
            recursion: NtRecursion::Scaled,
            max_degree: 60,
            parity: Parity::All,
            degree_min: None,
            degree_max: None,
        }
    }
}

impl EigendecayParams {
    pub fn fill_defaults(&mut self) {
        let (lo, hi) = degree_range(self.s, self.max_degree, self.degree_min, self.degree_max);
        self.degree_min = Some(lo);
        self.degree_max = Some(hi);
    }
}

pub fn eigendecay(p: &EigendecayParams) -> Result<Outcome> {
    let table = spectrum_for(p.family, p.s, p.l, p.d, p.max_degree, p.recursion)?;
    let range = degree_range(p.s, p.max_degree, p.degree_min, p.degree_max);
    let fit = eigendecay_fit(&table, p.parity, range)?;
    let mut t = Table::new(&["parity", "degree_min", "degree_max", "slope", "intercept", "r_squared", "used"]);
    t.push(vec![
        p.parity.to_string(),
        range.0.to_string(),
        range.1.to_string(),
        fmt_float(fit.slope),
        fmt_float(fit.intercept),
        fmt_float(fit.r_squared),
        fit.used.to_string(),
    ]);
    let payload = json!({
        "parity": p.parity,
        "degree_range": [range.0, range.1],
        "fit": fit,
        "eigenvalues": table.eigenvalues(),
    });
    Outcome::new(payload, t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaternCompareParams {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub nu: f64,
    pub lengthscale: f64,
    pub max_degree: usize,
    pub parity: Parity,
    pub degree_min: Option<usize>,
    pub degree_max: Option<usize>,
}

impl Default for MaternCompareParams {
    fn default() -> Self {
        Self {
            family: KernelFamily::Nt,
            s: 1,
            d: 3,
            nu: 0.5,
            lengthscale: 1.0,
            max_degree: 60,
            parity: Parity::All,
            degree_min: None,
            degree_max: None,
        }
    }
}

impl MaternCompareParams {
    pub fn fill_defaults(&mut self) {
        let (lo, hi) = degree_range(self.s, self.max_degree, self.degree_min, self.degree_max);
        self.degree_min = Some(lo);
        self.degree_max = Some(hi);
    }
}

pub fn matern_compare(p: &MaternCompareParams) -> Result<Outcome> {
    let num = spectrum_for(p.family, p.s, 2, p.d, p.max_degree, NtRecursion::Scaled)?;
    let den = matern_spectrum::<f64>(&MaternSpec::new(p.nu, p.lengthscale, p.d)?, p.max_degree)?;
    let range = degree_range(p.s, p.max_degree, p.degree_min, p.degree_max);
    let summary = rkhs_equivalence_ratio(&num, &den, range, p.parity)?;
    let mut t = Table::new(&["degree", "kernel", "matern", "ratio"]);
    let mut rows = Vec::new();
    for i in (range.0..=range.1).filter(|&i| p.parity.admits(i)) {
        let (a, b) = (num.eigenvalue(i), den.eigenvalue(i));
        t.push(vec![i.to_string(), fmt_float(a), fmt_float(b), fmt_float(a / b)]);
        rows.push(json!({"degree": i, "kernel": a, "matern": b, "ratio": a / b}));
    }
    let payload = json!({
        "parity": p.parity,
        "degree_range": [range.0, range.1],
        "summary": summary,
        "spread": summary.max_ratio / summary.min_ratio,
        "degrees": rows,
    });
    Outcome::new(payload, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Uniform,
    Greedy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoGainParams {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub lambda: f64,
    pub sampling: Sampling,
    pub candidates: usize,
    pub seed: u64,
}

impl Default for InfoGainParams {
    fn default() -> Self {
        Self {
            family: KernelFamily::Nt,
            s: 1,
            d: 3,
            n_grid: vec![16, 32, 64, 128, 256],
            lambda: 1.0,
            sampling: Sampling::Uniform,
            candidates: 4096,
            seed: 42,
        }
    }
}

pub fn infogain(p: &InfoGainParams) -> Result<Outcome> {
    let k = kernel(p.family, p.s, 2, p.d, NtRecursion::Scaled)?;
    let n_max = p.n_grid.iter().copied().max().ok_or_else(|| Error::config("n grid must be non-empty"))?;
    let points = match p.sampling {
        Sampling::Uniform => sample_sphere::<f64>(p.d, n_max, p.seed)?,
        Sampling::Greedy => {
            let grid = sample_sphere::<f64>(p.d, p.candidates, p.seed)?;
            let trace = greedy_max_variance(&k, &grid, n_max, p.lambda)?;
            trace.indices.iter().map(|&i| grid[i].clone()).collect()
        }
    };
    let reports: Vec<InfoGainReport> =
        p.n_grid.par_iter().map(|&n| info_gain_report(&k, &points[..n], p.lambda)).collect::<Result<_>>()?;
    Outcome::new(json!({ "points": reports }), report::info_gain_table(&reports))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGreedyParams {
    pub family: KernelFamily,
    pub s: u32,
    pub d: usize,
    pub n: usize,
    pub lambda: f64,
    pub candidates: usize,
    pub seed: u64,
}

impl Default for SampleGreedyParams {
    fn default() -> Self {
        Self { family: KernelFamily::Nt, s: 1, d: 3, n: 64, lambda: 1.0, candidates: 4096, seed: 42 }
    }
}

pub fn sample_greedy(p: &SampleGreedyParams) -> Result<Outcome> {
    let k = kernel(p.family, p.s, 2, p.d, NtRecursion::Scaled)?;
    let grid = sample_sphere::<f64>(p.d, p.candidates, p.seed)?;
    let trace = greedy_max_variance(&k, &grid, p.n, p.lambda)?;
    let selected: Vec<Vec<f64>> = trace.indices.iter().map(|&i| grid[i].clone()).collect();
    // Effective dimension at powers of two and at the final size.
    let checkpoints: Vec<usize> = (1..=p.n).filter(|m| m.is_power_of_two() || *m == p.n).collect();
    let dims: Vec<f64> =
        checkpoints.par_iter().map(|&m| effective_dimension(&k, &selected[..m], p.lambda)).collect::<Result<_>>()?;
    let mut effective = vec![None; p.n];
    for (&m, &v) in checkpoints.iter().zip(&dims) {
        effective[m - 1] = Some(v);
    }
    let check = variance_sum_check(&k, &selected, p.lambda)?;
    let payload = json!({
        "trace": trace,
        "points": selected,
        "variance_sum": check,
        "variance_sum_holds": check.holds(1e-8),
    });
    Outcome::new(payload, report::greedy_table(&trace, p.lambda, &effective))
}

pub fn error_rate(cfg: &ErrorRateConfig) -> Result<Outcome> {
    let r = error_rate_experiment(cfg)?;
    let mut out = Outcome::new(&r, report::error_rate_table(&r))?;
    out.plot = Some(report::error_rate_plot_table(&r));
    Ok(out)
}

pub fn mig_growth(cfg: &MigGrowthConfig) -> Result<Outcome> {
    let r = mig_growth_experiment(cfg)?;
    let mut out = Outcome::new(&r, report::mig_table(&r))?;
    let mut plot = Table::new(&["family", "s", "d", "lambda", "n", "info_gain", "theoretical_exponent"]);
    for pt in &r.points {
        plot.push(vec![
            r.family.to_string(),
            r.s.to_string(),
            r.d.to_string(),
            fmt_float(r.lambda),
            pt.n.to_string(),
            fmt_float(pt.info_gain),
            fmt_float(r.theoretical_exponent),
        ]);
    }
    out.plot = Some(plot);
    Ok(out)
}
