//! Gegenbauer polynomials, harmonic multiplicities and the addition-theorem
//! constant.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `C_i^α(u)` by the three-term recurrence.
pub fn gegenbauer<T: Scalar>(alpha: T, i: usize, u: T) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(Error::config(format!("Gegenbauer parameter alpha = {alpha} must be positive")));
    }
    Ok(gegenbauer_unchecked(alpha, i, u))
}

pub(crate) fn gegenbauer_unchecked<T: Scalar>(alpha: T, i: usize, u: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if i == 0 {
        return prev;
    }
    let mut cur = two * alpha * u;
    for k in 2..=i {
        let kf = T::lit(k as f64);
        let next = (two * (kf + alpha - T::one()) * u * cur - (kf + two * alpha - two) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_i^α(1) = Π_{k=1}^{i} (k + 2α - 1) / k`.
pub fn gegenbauer_at_one<T: Scalar>(alpha: T, i: usize) -> T {
    let two = T::lit(2.0);
    (1..=i).fold(T::one(), |acc, k| {
        let kf = T::lit(k as f64);
        acc * (kf + two * alpha - T::one()) / kf
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) / (j + 1))
}

/// Number of linearly independent degree-`i` spherical harmonics on
/// `S^{d-1}`: `N_{d,i} = (2i+d-2)/i · C(i+d-3, d-2)`, `N_{d,0} = 1`.
pub fn multiplicity(d: usize, i: usize) -> Result<u128> {
    if d < 2 {
        return Err(Error::UnsupportedDimension { d });
    }
    if i == 0 {
        return Ok(1);
    }
    if d == 2 {
        return Ok(2);
    }
    let (d, i) = (d as u128, i as u128);
    let b = binomial(i + d - 3, d - 2);
    // (2i+d-2)·b is divisible by i.
    Ok((2 * i + d - 2) * b / i)
}

/// `Γ(α)` for `α = (d-2)/2`, an integer or half-integer.
pub(crate) fn gamma_half_integer(d: usize) -> f64 {
    debug_assert!(d >= 3);
    let twice = d - 2;
    if twice % 2 == 0 {
        (1..twice / 2).map(|k| k as f64).product()
    } else {
        // Γ(m + 1/2) = √π · Π_{k=1}^{m} (k - 1/2).
        let m = twice / 2;
        (1..=m).map(|k| k as f64 - 0.5).product::<f64>() * std::f64::consts::PI.sqrt()
    }
}

/// `Γ(α) / (2 π^α)` with `α = (d-2)/2`.
pub(crate) fn surface_factor(d: usize) -> f64 {
    let alpha = (d as f64 - 2.0) / 2.0;
    gamma_half_integer(d) / (2.0 * std::f64::consts::PI.powf(alpha))
}

/// `c_{i,d} = N_{d,i} Γ(α) / (2 π^α C_i^α(1))`, the constant in
/// `Σ_j φ_{i,j}(x) φ_{i,j}(x') = c_{i,d} C_i^α(xᵀx')`.
pub fn addition_constant(d: usize, i: usize) -> Result<f64> {
    if d < 3 {
        return Err(Error::UnsupportedDimension { d });
    }
    let alpha = (d as f64 - 2.0) / 2.0;
    Ok(multiplicity(d, i)? as f64 * surface_factor(d) / gegenbauer_at_one(alpha, i))
}
