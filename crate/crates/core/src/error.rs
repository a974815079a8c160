use thiserror::Error;

use crate::sras::SolverTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} failed)")]
    NotPositiveDefinite { pivot: usize },

    #[error("sample covariance is singular: {0}")]
    SingularCovariance(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    NoConvergence { a: f64, b: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("total initial wealth is zero")]
    ZeroWealth,

    #[error("portfolio variance is not positive")]
    DegeneratePortfolio,

    #[error("weights cannot be normalized: sum of the tangency ray is {sum:e}")]
    DegenerateNormalization { sum: f64 },

    #[error("no asset has positive excess return over the benchmark")]
    NoPositiveExcess,

    #[error("iteration limit {max_iter} reached")]
    IterationLimit {
        max_iter: usize,
        best: Vec<f64>,
        trace: Option<Box<SolverTrace>>,
    },

    #[error("no multiplier attains the projection target {target}")]
    InfeasibleProjection { target: f64 },

    #[error("dimension {n} too large for grid search (max {max})")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("lower partial moment {value:e} is too small to form an Omega ratio")]
    DegenerateDenominator { value: f64 },

    #[error("skewness {0} outside the supported range [-0.99, 0.99]")]
    SkewnessOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::SingularCovariance(_) => "SingularCovariance",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Io(_) => "IoError",
            Error::ZeroWealth => "ZeroWealth",
            Error::DegeneratePortfolio => "DegeneratePortfolio",
            Error::DegenerateNormalization { .. } => "DegenerateNormalization",
            Error::NoPositiveExcess => "NoPositiveExcess",
            Error::IterationLimit { .. } => "IterationLimit",
            Error::InfeasibleProjection { .. } => "InfeasibleProjection",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::DegenerateDenominator { .. } => "DegenerateDenominator",
            Error::SkewnessOutOfRange(_) => "SkewnessOutOfRange",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
