use thiserror::Error;

/// Every fallible operation in the crate reports through this enum.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p must be odd")]
    EvenPrime,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration bound exceeded: {needed} > {bound}")]
    BoundExceeded { needed: u128, bound: u128 },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("chain condition violated: {0}")]
    ChainViolation(String),
    #[error("not a vertex lattice: {0}")]
    NotAVertex(String),
    #[error("odd shift index {0} is unsupported")]
    OddShiftUnsupported(i32),
    #[error("pair is not in J: lambda^(p+1) + mu^(p+1) != 0")]
    NotInJ,
    #[error("point is not on the chart curve")]
    ChartViolation,
    #[error("vertex is not in the explored ball")]
    NotInBall,
    #[error("generator {0} does not vanish at the origin")]
    NonVanishing(usize),
    #[error("gram matrix is not skew-hermitian")]
    NotSkewHermitian,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precision(msg: impl Into<String>) -> Error {
    Error::InsufficientPrecision(msg.into())
}
