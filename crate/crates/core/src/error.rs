use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    #[error("invalid tail form: {0}")]
    InvalidTailForm(String),

    #[error("invalid menu entry: {0}")]
    InvalidEntry(String),

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("incompatible cover: {0}")]
    IncompatibleCover(String),

    #[error("price {price} outside (0, {h}]")]
    PriceOutOfRange { price: f64, h: f64 },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure in LP solve: {0}")]
    Numerical(String),

    #[error("enumeration budget exceeded: {required} > {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("intersection property unattainable after {attempts} attempts (m={m}, K={k})")]
    IntersectionUnattainable { attempts: usize, m: usize, k: usize },

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
