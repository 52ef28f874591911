//! Synthetic ground truths, error-rate and information-gain growth
//! experiments, and the exponents they are compared against.

mod error_rate;
mod exponents;
mod mig;
mod slope;
mod synthetic;

pub use error_rate::{
    error_rate_experiment, power_of_two_grid, ErrorRateConfig, ErrorRateReport, FitWindow, RepetitionFailure,
    RepetitionResult,
};
pub use exponents::{theoretical_error_exponent, theoretical_mig_exponent};
pub use mig::{mig_growth_experiment, MigGrowthConfig, MigGrowthReport, MigPoint};
pub use slope::{fit_loglog_slope, LogLogFit};
pub use synthetic::{SyntheticConfig, SyntheticFunction};
