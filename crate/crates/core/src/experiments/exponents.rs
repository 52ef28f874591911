use crate::error::{Error, Result};
use crate::kernels::KernelFamily;

fn check(s: u32, d: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::UnsupportedSmoothness { s, supported: "s >= 1" });
    }
    if d < 2 {
        return Err(Error::config(format!("ambient dimension d = {d} but d >= 2 is required")));
    }
    Ok(())
}

/// Error-rate exponent: `(1-2s)/(2d+4s-4)` for NT, `(-2s-1)/(2d+4s)` for RF.
pub fn theoretical_error_exponent(family: KernelFamily, s: u32, d: usize) -> Result<f64> {
    check(s, d)?;
    let (s, d) = (s as f64, d as f64);
    Ok(match family {
        KernelFamily::Nt => (1.0 - 2.0 * s) / (2.0 * d + 4.0 * s - 4.0),
        KernelFamily::Rf => (-2.0 * s - 1.0) / (2.0 * d + 4.0 * s),
    })
}

/// Information-gain growth exponent: `(d-1)/(d+2s-2)` for NT,
/// `(d-1)/(d+2s)` for RF.
pub fn theoretical_mig_exponent(family: KernelFamily, s: u32, d: usize) -> Result<f64> {
    check(s, d)?;
    let (s, d) = (s as f64, d as f64);
    Ok(match family {
        KernelFamily::Nt => (d - 1.0) / (d + 2.0 * s - 2.0),
        KernelFamily::Rf => (d - 1.0) / (d + 2.0 * s),
    })
}
