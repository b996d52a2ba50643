//! Error type shared by every module.

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of kernel evaluation, sampling and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter {name} = {value} is outside its domain (requires {requirement})")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("ordering violated: {0}")]
    Ordering(&'static str),
    #[error("invalid time grid: {0}")]
    Grid(&'static str),
    #[error("regime conditions not met: {0}")]
    Regime(&'static str),
    #[error("unsupported input: {0}")]
    Unsupported(&'static str),
    #[error("quadrature missed tolerance {tolerance:e}: estimate {estimate}, error estimate {error_estimate:e}")]
    ToleranceNotMet {
        estimate: f64,
        error_estimate: f64,
        tolerance: f64,
    },
    #[error("covariance matrix has not been factorized")]
    NotFactored,
    #[error("covariance matrix is indefinite (minimum eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },
    #[error("evaluation routes disagree: {first} vs {second}")]
    RouteMismatch { first: f64, second: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("population exceeded {limit} live particles")]
    Explosion { limit: usize },
}

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parameter { .. }
                | Error::Ordering(_)
                | Error::Grid(_)
                | Error::Regime(_)
                | Error::Unsupported(_)
                | Error::Degenerate(_)
        )
    }

    pub(crate) fn param(name: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Parameter {
            name,
            value,
            requirement,
        }
    }
}
