//! Error type shared by every computation in the crate.

use thiserror::Error;

/// Everything that can go wrong while computing.
///
/// Variant names are stable: the command line prints them verbatim, so
/// scripts can match on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precision overflow: {0}")]
    PrecisionOverflow(String),
    #[error("precision must be at least 64 bits, got {0}")]
    PrecisionTooLow(u32),
    #[error("cannot parse number `{0}`")]
    Parse(String),
    #[error("matrix is numerically nonsingular")]
    NotSingular,
    #[error("matrix is numerically zero")]
    RankZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inadmissible parameters: {0}")]
    InadmissibleParams(String),
    #[error("support of size {support} cannot carry a degree {degree} orthogonal polynomial")]
    DegenerateSupport { support: usize, degree: usize },
    #[error("brute force enumeration too large ({0} subsets)")]
    TooLarge(u128),
    #[error("degenerate initial data: {0}")]
    DegenerateInitialData(String),
    #[error("singular step at s = {s}: {reason}")]
    SingularStep { s: usize, reason: String },
    #[error("singular ratio at s = {0}")]
    SingularRatio(usize),
    #[error("non-generic connection: {0}")]
    NonGenericConnection(String),
    #[error("cancellation failure: {0}")]
    CancellationFailure(String),
    #[error("coordinate at infinity (leading coefficient of a21 vanishes)")]
    CoordinateAtInfinity,
    #[error("no real edge: discriminant {0} is negative")]
    NoRealEdge(f64),
    #[error("scaling failure: {0}")]
    ScalingFailure(String),
    #[error("argument {0} outside the supported domain")]
    DomainError(f64),
    #[error("quadrature did not converge: {0}")]
    QuadratureError(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short variant name, printed by the command line on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::PrecisionOverflow(_) => "PrecisionOverflow",
            Error::PrecisionTooLow(_) => "PrecisionTooLow",
            Error::Parse(_) => "Parse",
            Error::NotSingular => "NotSingular",
            Error::RankZero => "RankZero",
            Error::Dimension(_) => "Dimension",
            Error::InadmissibleParams(_) => "InadmissibleParams",
            Error::DegenerateSupport { .. } => "DegenerateSupport",
            Error::TooLarge(_) => "TooLarge",
            Error::DegenerateInitialData(_) => "DegenerateInitialData",
            Error::SingularStep { .. } => "SingularStep",
            Error::SingularRatio(_) => "SingularRatio",
            Error::NonGenericConnection(_) => "NonGenericConnection",
            Error::CancellationFailure(_) => "CancellationFailure",
            Error::CoordinateAtInfinity => "CoordinateAtInfinity",
            Error::NoRealEdge(_) => "NoRealEdge",
            Error::ScalingFailure(_) => "ScalingFailure",
            Error::DomainError(_) => "DomainError",
            Error::QuadratureError(_) => "QuadratureError",
            Error::Usage(_) => "Usage",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
