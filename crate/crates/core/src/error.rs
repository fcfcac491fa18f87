use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation has no definition for these arguments.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative method did not meet its tolerance.
    #[error("numeric error: {message} (residuals: {residuals:?})")]
    Numeric { message: String, residuals: Vec<f64> },

    /// Two eigenvalues are too close for a diagonalizing similarity transform.
    #[error("degenerate spectrum: eigenvalues #{first} and #{second} are {gap:e} apart")]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        gap: f64,
    },

    /// A trajectory left the divergence bound while a bounded run was required.
    #[error("trajectory diverged at t = {at_time}")]
    Diverged { at_time: f64 },

    /// The measurement window held too few maxima to classify the attractor.
    #[error("inconclusive window: {maxima} maxima found, at least {required} needed")]
    InconclusiveWindow { maxima: usize, required: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residuals: Vec<f64>) -> Self {
        Error::Numeric {
            message: msg.into(),
            residuals,
        }
    }

    /// Numerical failures (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::InconclusiveWindow { .. }
                | Error::Diverged { .. }
        )
    }
}
