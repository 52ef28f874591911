//! Neural tangent (NT) and random-feature (RF) kernels for power-ReLU
//! networks on the unit hypersphere.
//!
//! - [`kernels`]: closed-form and Monte-Carlo kernel evaluation, Gram matrices.
//! - [`spectral`]: Mercer spectra via Gegenbauer projection, tail sums,
//!   Matérn spectra, eigendecay fits.
//! - [`krr`]: kernel ridge regression, posterior variance, information gain,
//!   effective dimension, greedy max-variance sampling.
//! - [`experiments`]: synthetic ground truths, error-rate and information-gain
//!   growth experiments, log-log exponent fits.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod kernels;
pub mod krr;
pub mod linalg;
pub mod report;
pub mod scalar;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
pub use kernels::{DotProductKernel, KernelFamily, KernelSpec, McOracleConfig, NtRecursion};
pub use scalar::Scalar;

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Kernel64 = kernels::DotProductKernel<f64>;
pub type Kernel32 = kernels::DotProductKernel<f32>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Basis64 = spectral::GegenbauerBasis<f64>;
pub type Spectrum64 = spectral::SpectrumTable<f64>;
pub type Dataset64 = krr::SphericalDataset<f64>;
pub type Regressor64 = krr::FittedRegressor<f64>;
