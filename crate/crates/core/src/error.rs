use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("foreign class: {0}")]
    ForeignClass(String),
    #[error("base outside cone")]
    BaseOutsideCone,
    #[error("direction class is zero")]
    ZeroDirection,
    #[error("not pseudoeffective")]
    NotPseudoeffective,
    #[error("inconsistent negative-curve data: {0}")]
    InconsistentNegativeCurves(String),
    #[error("divisor is not nef; reduce to nef part first")]
    NotNef,
    #[error("divisor is not big")]
    NotBig,
    #[error("dimension must be at least 4, got {0}")]
    DimensionTooSmall(i64),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("boundary not algebraic of degree <= 2")]
    BoundaryNotAlgebraic,
    #[error("boundary polynomial is not determined by the samples")]
    BoundaryUnderdetermined,
    #[error("boundary polynomial is identically zero")]
    ZeroPolynomial,
    #[error("table too short: need at least {needed} coefficients, got {got}")]
    TableTooShort { needed: usize, got: usize },
    #[error("lattice rank {rank} exceeds limit {limit}")]
    RankTooLarge { rank: usize, limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for violations of mathematical preconditions, as opposed to
    /// malformed input.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Parse(_) | Error::InvalidInput(_) | Error::RankTooLarge { .. })
    }
}
