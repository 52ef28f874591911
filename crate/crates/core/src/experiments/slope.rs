use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares of `log y` on `log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `log y = intercept + slope · log x`. Needs at least 3 points, all
/// positive. `r²` is 1 when `y` is constant.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::config(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: xs.len() });
    }
    for &v in xs.iter().chain(ys) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositive { value: v });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::config("log-log fit needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if sst == 0.0 { 1.0 } else { 1.0 - sse / sst };
    Ok(LogLogFit { slope, intercept, r_squared })
}
