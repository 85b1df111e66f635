use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the transfer-function algebra, the inversion routines and
/// the analysis layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: String, reason: String },

    #[error("{value} is not a zero of the numerator (scaled residual {residual:.3e})")]
    NotAZero { value: f64, residual: f64 },

    #[error("term magnitude overflowed the floating range at s = {s}")]
    Overflow { s: Complex64 },

    #[error("root finder failed to converge for a degree-{degree} polynomial (max residual {max_residual:.3e})")]
    RootConvergence { degree: usize, max_residual: f64 },

    #[error("transform evaluated to a non-finite value at node s = {node} (t = {t})")]
    NonFiniteNode { node: Complex64, t: f64 },

    #[error("response has not settled: tail spread {spread:.3e} exceeds 5% of {mean:.6}")]
    NotSettled { spread: f64, mean: f64 },

    #[error("rational fit is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("rational fit did not converge after {rounds} rounds (last change {last_change:.3e})")]
    FitNonConvergence { rounds: usize, last_change: f64 },

    #[error("scenario error at `{path}`: {reason}")]
    Schema { path: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// The offending field path for validation-type errors.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            Error::InvalidArgument { field, .. } => Some(field),
            Error::Schema { path, .. } => Some(path),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
