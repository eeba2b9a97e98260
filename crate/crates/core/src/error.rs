use crate::gf2::SubfileId;
use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid demand: {0}")]
    InvalidDemand(String),

    #[error("cache size {m} is outside the allowed range [{lo}, {hi}]")]
    CacheSizeOutOfRange {
        m: Rational,
        lo: Rational,
        hi: Rational,
    },

    #[error("plan does not match the scheme: {0}")]
    PlanMismatch(String),

    #[error("user {user} cannot decode subfile {subfile}")]
    Undecodable { user: usize, subfile: SubfileId },

    #[error("file size {bytes} is not divisible by {parts} parts")]
    NotDivisible { bytes: usize, parts: usize },

    #[error("enumeration of {needed} demand vectors exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// True for errors that mean a schedule failed to deliver, as opposed
    /// to bad input.
    pub fn is_verification_failure(&self) -> bool {
        matches!(self, Error::Undecodable { .. })
    }
}
