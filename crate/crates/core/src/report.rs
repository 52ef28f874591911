//! Tabular views of reports for CSV output.
//!
//! Floats use the shortest representation that parses back to the same
//! `f64`, so every value round-trips exactly.

use std::io::Write;

use crate::error::Result;
use crate::experiments::{ErrorRateReport, MigGrowthReport};
use crate::krr::{GreedyTrace, InfoGainReport};
use crate::scalar::Scalar;
use crate::spectral::SpectrumTable;

/// Float formatting used in every CSV payload.
pub fn fmt_float(x: f64) -> String {
    x.to_string()
}

/// Header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC-4180 output with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

pub fn spectrum_table<T: Scalar>(table: &SpectrumTable<T>) -> Table {
    let mut t = Table::new(&["degree", "eigenvalue", "multiplicity"]);
    for (i, (l, n)) in table.eigenvalues().iter().zip(table.multiplicities()).enumerate() {
        t.push(vec![i.to_string(), fmt_float(l.to_f64_lossy()), n.to_string()]);
    }
    t
}

/// `n,rep,sup_error`.
pub fn error_rate_table(report: &ErrorRateReport) -> Table {
    let mut t = Table::new(&["n", "rep", "sup_error"]);
    for (n, rep, e) in report.rows() {
        t.push(vec![n.to_string(), rep.to_string(), fmt_float(e)]);
    }
    t
}

/// Tidy rows for plotting: one row per (n, repetition) with the panel keys.
pub fn error_rate_plot_table(report: &ErrorRateReport) -> Table {
    let mut t = Table::new(&["family", "s", "d", "n", "rep", "sup_error", "theoretical_exponent"]);
    for (n, rep, e) in report.rows() {
        t.push(vec![
            report.family.to_string(),
            report.s.to_string(),
            report.d.to_string(),
            n.to_string(),
            rep.to_string(),
            fmt_float(e),
            fmt_float(report.theoretical_exponent),
        ]);
    }
    t
}

/// `n,info_gain,effective_dim,sum_variance,bound_rhs`.
pub fn mig_table(report: &MigGrowthReport) -> Table {
    let mut t = Table::new(&["n", "info_gain", "effective_dim", "sum_variance", "bound_rhs"]);
    for p in &report.points {
        t.push(vec![
            p.n.to_string(),
            fmt_float(p.info_gain),
            fmt_float(p.effective_dim),
            fmt_float(p.sum_variance),
            fmt_float(p.bound_rhs),
        ]);
    }
    t
}

/// Per-step greedy trace with the same columns as the growth curve; the
/// effective dimension is left empty where it was not computed.
pub fn greedy_table(trace: &GreedyTrace, lambda: f64, effective_dims: &[Option<f64>]) -> Table {
    let mut t = Table::new(&["n", "index", "variance", "info_gain", "effective_dim", "sum_variance", "bound_rhs"]);
    let scale = 2.0 / (1.0 + 1.0 / (lambda * lambda)).ln();
    let mut sum = 0.0;
    for (k, ((&idx, &var), &gain)) in trace.indices.iter().zip(&trace.variances).zip(&trace.info_gain_path).enumerate() {
        sum += var;
        t.push(vec![
            (k + 1).to_string(),
            idx.to_string(),
            fmt_float(var),
            fmt_float(gain),
            effective_dims.get(k).copied().flatten().map(fmt_float).unwrap_or_default(),
            fmt_float(sum),
            fmt_float(scale * gain),
        ]);
    }
    t
}

/// `n,info_gain,effective_dim,lambda`.
pub fn info_gain_table(reports: &[InfoGainReport]) -> Table {
    let mut t = Table::new(&["n", "info_gain", "effective_dim", "lambda"]);
    for r in reports {
        t.push(vec![r.n.to_string(), fmt_float(r.info_gain), fmt_float(r.effective_dim), fmt_float(r.lambda)]);
    }
    t
}
