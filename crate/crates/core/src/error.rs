use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{what}: {needed} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus is not irreducible over F_{p}")]
    Reducible { p: u32 },

    #[error("invalid field modulus: {0}")]
    InvalidModulus(String),

    #[error("characteristic {characteristic} is too small for degree {degree}")]
    SmallCharacteristic { characteristic: u64, degree: usize },

    #[error("operation requires a field, got {0}")]
    NotAField(String),

    #[error("operation requires a finite field, got {0}")]
    InfiniteRing(String),

    #[error("division by zero")]
    ZeroDivision,

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("matrix has full column rank, no nonzero kernel vector")]
    FullRank,

    #[error("partition rank is undefined for a nonzero form of arity {0}")]
    InfiniteRank(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks `needed <= cap`, reporting `what` otherwise.
pub(crate) fn check_cap(what: &'static str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::CapExceeded { what, needed, cap })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn sat_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
