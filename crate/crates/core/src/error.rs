use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("site index {index} out of range for a system with {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical failure: {what} (residual {residual:.3e})")]
    NumericalFailure { what: String, residual: f64 },

    #[error("no rise detected in the commutator function between sites {site_a} and {site_b}")]
    NoRiseDetected { site_a: usize, site_b: usize },

    #[error("Fock space dimension {dimension} exceeds the limit of {limit}: {hint}")]
    DimensionOverflow {
        dimension: usize,
        limit: usize,
        hint: String,
    },

    #[error("norm drift {drift:.3e} exceeds {limit:.1e}; reduce the time step")]
    StepSize { drift: f64, limit: f64 },
}

impl Error {
    /// True for errors caused by a failed numerical procedure rather than by
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure { .. } | Error::StepSize { .. } | Error::NoRiseDetected { .. }
        )
    }
}
