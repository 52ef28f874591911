use thiserror::Error;

/// Errors raised by kernel evaluation, spectral analysis, regression and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "unsupported smoothness s = {s}: closed forms exist for s in {{{supported}}}; \
         larger s needs a recursion or quadrature path"
    )]
    UnsupportedSmoothness { s: u32, supported: &'static str },

    #[error("argument {value} lies outside [-1, 1]")]
    Domain { value: f64 },

    #[error("log-log fit needs positive values, got {value}")]
    NonPositive { value: f64 },

    #[error("denominator eigenvalue at degree {degree} is zero")]
    ZeroEigenvalue { degree: usize },

    #[error("point {index} is not unit norm (norm = {norm})")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported dimension d = {d}: spectral operations need d >= 3")]
    UnsupportedDimension { d: usize },

    #[error("spectral accuracy check failed: {0}; increase the quadrature order")]
    SpectralAccuracy(String),

    #[error("ill-conditioned Gram matrix (condition estimate {condition:.3e}) after maximum jitter")]
    IllConditionedGram { condition: f64 },

    #[error("fit needs at least {needed} usable points, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("degenerate synthetic function: sampled range {range:e}")]
    DegenerateFunction { range: f64 },

    #[error("RKHS norm certificate violated: ||g||^2 = {norm_sq:e} exceeds bound {bound:e}")]
    NormCertificate { norm_sq: f64, bound: f64 },

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or configuration.
    Configuration,
    /// A computation ran and failed numerically.
    Numerical,
    /// Reading or writing failed.
    Io,
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UnsupportedSmoothness { .. }
            | Error::Domain { .. }
            | Error::NotUnitNorm { .. }
            | Error::NonPositive { .. }
            | Error::ZeroEigenvalue { .. }
            | Error::Config(_)
            | Error::UnsupportedDimension { .. } => ErrorClass::Configuration,
            Error::SpectralAccuracy(_)
            | Error::IllConditionedGram { .. }
            | Error::InsufficientData { .. }
            | Error::DegenerateFunction { .. }
            | Error::NormCertificate { .. }
            | Error::Experiment(_) => ErrorClass::Numerical,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
