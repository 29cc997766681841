use crate::arith::ArithError;
use crate::symbols::Place;

/// Errors surfaced by the library beyond plain arithmetic failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("estimated work {estimated} exceeds the budget of {budget}")]
    BudgetExceeded { estimated: f64, budget: f64 },
    #[error("insufficient precision at {place}: need about {extra} more digits")]
    InsufficientPrecision { place: Place, extra: u32 },
    #[error("place {0} is not covered by a listed local point or a recorded argument")]
    UncoveredPlace(Place),
    #[error("point does not lie on the variety: {0}")]
    NotOnVariety(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("certificate refused at leg `{leg}`: {reason}")]
    CertificateRefused { leg: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
