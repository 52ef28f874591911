//! Leading coefficients of the RF kernels at `u = ±1`:
//! `κ_s(-1+t) = c_{-1,s} t^{(2s+1)/2} + o(t^{(2s+1)/2})`.

use crate::error::Result;
use crate::kernels::rf_closed;

/// `(c_{-1,s}, c_{+1,s})` with `c_{-1,s} = (2^s √2/π) Π_{r=1}^{s} r²/(4r²-1)`
/// and `c_{+1,s} = (-1)^{s-1} c_{-1,s}`.
pub fn endpoint_coefficient(s: u32) -> (f64, f64) {
    let product: f64 = (1..=s).map(|r| (r * r) as f64 / (4 * r * r - 1) as f64).product();
    let c_minus = 2f64.powi(s as i32) * std::f64::consts::SQRT_2 / std::f64::consts::PI * product;
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    (c_minus, sign * c_minus)
}

/// `κ_s(-1+t) / t^{(2s+1)/2}` for each `t`; tends to `c_{-1,s}` as `t → 0`.
pub fn verify_endpoint(s: u32, t_grid: &[f64]) -> Result<Vec<f64>> {
    let power = (2 * s + 1) as f64 / 2.0;
    t_grid.iter().map(|&t| Ok(rf_closed(s, -1.0 + t)? / t.powf(power))).collect()
}
