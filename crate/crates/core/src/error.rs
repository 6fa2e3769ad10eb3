use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported polynomial degree {degree} for {what}")]
    UnsupportedDegree { what: &'static str, degree: usize },

    #[error("quadrature with {0} points is out of range")]
    QuadratureRange(usize),

    #[error("degenerate element {0} (zero Jacobian determinant)")]
    DegenerateElement(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("cg did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid solver tolerance {0:e}; expected a value in (0, 1e-4]")]
    InvalidTolerance(f64),

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
