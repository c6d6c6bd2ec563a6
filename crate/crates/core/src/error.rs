use thiserror::Error;

/// Errors raised by the arithmetic kernels and the constructions built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("substituted value has valuation {0}, expected a unit")]
    NonUnitSubstitution(i64),
    #[error("divergent composition: {0}")]
    DivergentComposition(String),
    #[error("leading coefficient is not a unit: {0}")]
    NonInvertibleLeadingTerm(String),
    #[error("lift obstruction at level {level}: {detail}")]
    LiftObstruction { level: u32, detail: String },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("incomparable precision at index {index}: need {needed}, have {have}")]
    IncomparablePrecision { index: i64, needed: i64, have: i64 },
    #[error("divergent sum: {0}")]
    DivergentSum(String),
    #[error("level {level} is not totally ramified: {detail}")]
    NotTotallyRamified { level: usize, detail: String },
    #[error("insufficient precision: {detail} (estimated requirement {required})")]
    InsufficientPrecision { required: i64, detail: String },
    #[error("not Galois: found {found} automorphisms, expected {expected}")]
    NotGalois { found: usize, expected: usize },
    #[error("unsupported residue field variant: {0}")]
    UnsupportedVariant(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for the precision-related failures (CLI maps these to a dedicated exit code).
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_) | Error::InsufficientPrecision { .. } | Error::IncomparablePrecision { .. }
        )
    }
}
