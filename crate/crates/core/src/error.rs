use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("series has no terms up to its truncation order")]
    ZeroSeries,
    #[error("coefficient cannot be expanded after substitution: {0}")]
    NonExpandableCoefficient(String),
    #[error("limit q -> 0 diverges: term with q-exponent {0}")]
    DivergentLimit(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("infinite product does not converge in q: {0}")]
    NonConvergentProduct(String),
    #[error("resonance at z-degree {0}")]
    Resonance(u32),
    #[error("no invertible normalization: {0}")]
    NormalizationConflict(String),
    #[error("residual nonzero at z-degree {zdeg}, q-exponent {qexp}, entry ({row},{col})")]
    ResidualNonzero {
        zdeg: i64,
        qexp: String,
        row: usize,
        col: usize,
    },
    #[error("precision loss: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    PrecisionLoss { estimate: f64, tolerance: f64 },
    #[error("wall gap unknown near slope {0}")]
    UnknownWallGap(String),
    #[error("slope {0} lies on a wall")]
    WallSlope(String),
    #[error("assembled products differ between paths")]
    PathMismatch,
    #[error("monodromy mismatch: {0}")]
    MonodromyMismatch(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("value not representable: {0}")]
    NonRepresentable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for errors caused by malformed or out-of-range input rather
    /// than by a failed mathematical assertion.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Invalid(_) | Error::IndexMismatch(_) | Error::WallSlope(_)
        )
    }
}
