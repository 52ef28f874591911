//! Mercer decomposition of zonal kernels on `S^{d-1}`.
//!
//! A kernel `κ(xᵀx')` expands as `Σ_i λ̃_i Σ_j φ_{i,j}(x) φ_{i,j}(x')`, where
//! `φ_{i,j}` are the `N_{d,i}` degree-`i` spherical harmonics. By the
//! addition theorem the inner sum equals `c_{i,d} C_i^α(xᵀx')` with
//! `α = (d-2)/2`, so `λ̃_i` follows from a one-dimensional Gegenbauer
//! projection. Spectral operations need `d >= 3`.

mod decay;
mod endpoint;
mod gegenbauer;
mod matern;
mod quadrature;
mod spectrum;
mod tail;

pub use decay::{default_degree_range, eigendecay_fit, rkhs_equivalence_ratio, DecayFit, Parity, RatioSummary, FIT_FLOOR};
pub use endpoint::{endpoint_coefficient, verify_endpoint};
pub use gegenbauer::{addition_constant, gegenbauer, gegenbauer_at_one, multiplicity};
pub use matern::{matern_spectrum, MaternSpec};
pub use quadrature::{GegenbauerBasis, NODES_PER_PANEL};
pub use spectrum::{flatten_spectrum, mercer_spectrum, reconstruct, Provenance, SpectrumTable};
pub use tail::{RemainderFit, TailEstimator, DEFAULT_MAX_DEGREE};
