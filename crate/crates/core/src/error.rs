use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters violate a structural constraint (for example `beta <= n`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An argument lies outside the admissible range of the operation.
    #[error("{name} = {value} is outside the admissible range ({range})")]
    Domain {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The point has zero density, so its information content is infinite.
    #[error("point lies outside the support; information content is infinite")]
    OutsideSupport,

    /// A root finder or maximizer failed to converge.
    #[error("solver failed: {0}")]
    Solver(String),

    #[error("quadrature did not converge: estimated error {error_estimate:e} after {intervals} subintervals")]
    Quadrature { intervals: usize, error_estimate: f64 },

    #[error("grid must be uniformly spaced with at least three points")]
    NonUniformGrid,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value,
            range: range.into(),
        }
    }

    /// True for errors caused by caller input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Solver(_) | Error::Quadrature { .. })
    }
}
