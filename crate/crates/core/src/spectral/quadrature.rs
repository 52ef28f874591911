//! Quadrature for `∫_{-1}^{1} f(t) (1-t²)^{(d-3)/2} dt` and Gegenbauer
//! projections built on it.
//!
//! The substitution `t = cos θ` turns the integral into
//! `∫_0^π f(cos θ) sin^{d-2} θ dθ`. The kernels have square-root type
//! behavior at `t = ±1` but are analytic in `θ`, so composite Gauss-Legendre
//! panels in `θ` converge quickly without endpoint refinement.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use super::gegenbauer::gegenbauer_at_one;
use crate::error::{Error, Result};
use crate::kernels::ZonalFunction;
use crate::scalar::Scalar;

/// Nodes per Gauss-Legendre panel.
pub const NODES_PER_PANEL: usize = 16;

/// Nodes handled per parallel work item; partial sums are reduced in order.
const CHUNK: usize = 512;

/// Quadrature nodes and weights for the Gegenbauer weight of `S^{d-1}`,
/// together with the squared norms `∫ (C_i^α)² w` for `i <= M`.
#[derive(Debug, Clone)]
pub struct GegenbauerBasis<T> {
    d: usize,
    alpha: T,
    max_degree: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    norms: Vec<T>,
}

impl<T: Scalar> GegenbauerBasis<T> {
    /// Basis with the default budget of `4(M + 8)` panels, i.e. at least
    /// `64(M + 8)` nodes.
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        Self::with_panels(d, max_degree, 4 * (max_degree + 8))
    }

    pub fn with_panels(d: usize, max_degree: usize, panels: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::UnsupportedDimension { d });
        }
        if panels == 0 {
            return Err(Error::config("quadrature needs at least one panel"));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(NODES_PER_PANEL).expect("nonzero"));
        let width = std::f64::consts::PI / panels as f64;
        let mut nodes = Vec::with_capacity(panels * NODES_PER_PANEL);
        let mut weights = Vec::with_capacity(panels * NODES_PER_PANEL);
        for p in 0..panels {
            let a = p as f64 * width;
            for &(x, w) in rule.as_node_weight_pairs() {
                let theta = a + 0.5 * width * (x + 1.0);
                nodes.push(T::lit(theta.cos()));
                weights.push(T::lit(0.5 * width * w * theta.sin().powi(d as i32 - 2)));
            }
        }
        let alpha = T::lit((d as f64 - 2.0) / 2.0);
        let mut basis = Self { d, alpha, max_degree, nodes, weights, norms: Vec::new() };
        basis.norms = basis.accumulate(|_| T::one(), true);
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `∫ (C_i^α)² w` for `i = 0..=M`.
    pub fn norms(&self) -> &[T] {
        &self.norms
    }

    /// `∫ f w` with the stored rule.
    pub fn integrate(&self, f: impl Fn(T) -> T + Sync) -> T {
        let partials: Vec<T> = self
            .nodes
            .par_chunks(CHUNK)
            .zip(self.weights.par_chunks(CHUNK))
            .map(|(ts, ws)| ts.iter().zip(ws).fold(T::zero(), |acc, (&t, &w)| acc + f(t) * w))
            .collect();
        partials.into_iter().fold(T::zero(), |a, b| a + b)
    }

    /// Per-degree sums `Σ_k w_k g(t_k) C_i(t_k)` (or `C_i(t_k)²` when
    /// `squared`), one recurrence pass per node.
    fn accumulate(&self, g: impl Fn(T) -> T + Sync, squared: bool) -> Vec<T> {
        let m = self.max_degree;
        let alpha = self.alpha;
        let two = T::lit(2.0);
        // Recurrence coefficients, shared by all nodes.
        let coeffs: Vec<(T, T)> = (0..=m)
            .map(|k| {
                if k < 2 {
                    return (T::zero(), T::zero());
                }
                let kf = T::lit(k as f64);
                (two * (kf + alpha - T::one()) / kf, (kf + two * alpha - two) / kf)
            })
            .collect();
        let partials: Vec<Vec<T>> = self
            .nodes
            .par_chunks(CHUNK)
            .zip(self.weights.par_chunks(CHUNK))
            .map(|(ts, ws)| {
                let mut acc = vec![T::zero(); m + 1];
                for (&t, &w) in ts.iter().zip(ws) {
                    let gw = g(t) * w;
                    let mut prev = T::one();
                    let mut cur = two * alpha * t;
                    let add = |acc: &mut T, c: T| {
                        *acc = *acc + if squared { c * c * w } else { c * gw };
                    };
                    add(&mut acc[0], prev);
                    if m >= 1 {
                        add(&mut acc[1], cur);
                    }
                    for k in 2..=m {
                        let (a, b) = coeffs[k];
                        let next = a * t * cur - b * prev;
                        prev = cur;
                        cur = next;
                        add(&mut acc[k], cur);
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![T::zero(); m + 1];
        for part in partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t = *t + p;
            }
        }
        total
    }

    /// Gegenbauer coefficients `b_i = ∫ f C_i w / ∫ C_i² w`, so that
    /// `f(t) ≈ Σ_i b_i C_i^α(t)`.
    pub fn project<F: ZonalFunction<T> + ?Sized>(&self, f: &F) -> Vec<T> {
        self.accumulate(|t| f.value(t), false).into_iter().zip(&self.norms).map(|(p, &n)| p / n).collect()
    }

    /// `max_{i≠j} |∫ C_i C_j w| / sqrt(‖C_i‖² ‖C_j‖²)` with the stored rule.
    /// Costs `O(M² · nodes)`; intended for validation.
    pub fn orthogonality_defect(&self) -> T {
        let m = self.max_degree;
        let values: Vec<Vec<T>> = self
            .nodes
            .iter()
            .map(|&t| {
                let mut row = Vec::with_capacity(m + 1);
                row.push(T::one());
                if m >= 1 {
                    row.push(T::lit(2.0) * self.alpha * t);
                }
                for k in 2..=m {
                    let kf = T::lit(k as f64);
                    let two = T::lit(2.0);
                    let next = (two * (kf + self.alpha - T::one()) * t * row[k - 1]
                        - (kf + two * self.alpha - two) * row[k - 2])
                        / kf;
                    row.push(next);
                }
                row
            })
            .collect();
        let worst: Vec<T> = (0..=m)
            .into_par_iter()
            .map(|i| {
                let mut local = T::zero();
                for j in 0..i {
                    let inner = values
                        .iter()
                        .zip(&self.weights)
                        .fold(T::zero(), |acc, (row, &w)| acc + row[i] * row[j] * w);
                    local = local.max(inner.abs() / (self.norms[i] * self.norms[j]).sqrt());
                }
                local
            })
            .collect();
        worst.into_iter().fold(T::zero(), |a, b| a.max(b))
    }

    /// `C_i^α(1)` for `i = 0..=M`.
    pub fn values_at_one(&self) -> Vec<T> {
        (0..=self.max_degree).map(|i| gegenbauer_at_one(self.alpha, i)).collect()
    }
}
