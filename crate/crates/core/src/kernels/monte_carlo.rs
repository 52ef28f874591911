//! Monte-Carlo estimates of the two-layer kernels as expectations over
//! Gaussian first-layer weights, used to cross-check the closed forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_unit, c_squared, KernelFamily, KernelSpec};
use crate::error::{Error, Result};
use crate::scalar::dot;

/// Samples per block. Block `b` draws from its own ChaCha stream, so the
/// estimate does not depend on how blocks are scheduled.
const BLOCK: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McOracleConfig {
    pub sample_count: u64,
    pub seed: u64,
}

impl Default for McOracleConfig {
    fn default() -> Self {
        Self { sample_count: 1_000_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// `max(0, z)^s` with `0⁰ = 0`.
#[inline]
fn power_relu(z: f64, s: u32) -> f64 {
    if z > 0.0 {
        z.powi(s as i32)
    } else {
        0.0
    }
}

/// Sample mean and standard error of the kernel integrand at `(x, x')`.
///
/// RF: `c² a_s(z) a_s(z')`. NT: `c² (u s² a_{s-1}(z) a_{s-1}(z') + a_s(z) a_s(z'))`,
/// with `z = wᵀx`, `z' = wᵀx'`, `w ~ N(0, I_d)` and `u = xᵀx'`.
pub fn mc_estimate(spec: &KernelSpec, x: &[f64], xp: &[f64], cfg: &McOracleConfig) -> Result<McEstimate> {
    if spec.depth != 2 {
        return Err(Error::config(format!("Monte-Carlo oracle covers depth 2 only, got l = {}", spec.depth)));
    }
    if cfg.sample_count < 2 {
        return Err(Error::config("Monte-Carlo oracle needs at least 2 samples"));
    }
    if x.len() != spec.dim || xp.len() != spec.dim {
        return Err(Error::config(format!(
            "inputs have dimensions {} and {}, kernel has d = {}",
            x.len(),
            xp.len(),
            spec.dim
        )));
    }
    check_unit(x, 0)?;
    check_unit(xp, 1)?;

    let s = spec.smoothness;
    let c2 = c_squared(s);
    let u = dot(x, xp).clamp(-1.0, 1.0);
    let nt_weight = u * (s * s) as f64;
    let family = spec.family;
    let d = spec.dim;
    let blocks = cfg.sample_count.div_ceil(BLOCK);

    let stats: Vec<Welford> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b);
            let count = BLOCK.min(cfg.sample_count - b * BLOCK);
            let mut w = vec![0.0; d];
            let mut acc = Welford::default();
            for _ in 0..count {
                for wi in w.iter_mut() {
                    *wi = StandardNormal.sample(&mut rng);
                }
                let z1 = dot(&w, x);
                let z2 = dot(&w, xp);
                let mut value = power_relu(z1, s) * power_relu(z2, s);
                if family == KernelFamily::Nt {
                    value += nt_weight * power_relu(z1, s - 1) * power_relu(z2, s - 1);
                }
                acc.push(c2 * value);
            }
            acc
        })
        .collect();

    let total = stats.into_iter().fold(Welford::default(), Welford::merge);
    let variance = total.m2 / (total.n - 1.0);
    Ok(McEstimate { estimate: total.mean, std_error: (variance / total.n).sqrt() })
}
