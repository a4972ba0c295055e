use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: u64,
        limit: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate {coord} out of range for dimension {dim}")]
    CoordinateOutOfRange { coord: usize, dim: usize },

    #[error("width mismatch: expected dimension {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("function is not monotone (coordinate {coord}, point {point:#x})")]
    NotMonotone { coord: usize, point: u64 },

    #[error("value {value} at point {point:#x} lies outside [0, 1]")]
    OutOfUnitRange { point: u64, value: f64 },

    #[error("total influence {influence} exceeds budget {budget}")]
    InfluenceBudget { influence: f64, budget: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("budget infeasible: beta = {beta} exceeds 1 ({detail})")]
    BudgetInfeasible { beta: f64, detail: &'static str },

    #[error("packing stopped after {attempts} draws with {} of {target} words", words.len())]
    PartialCode {
        words: Vec<crate::bits::BitString>,
        target: usize,
        attempts: usize,
    },

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors that stem from size limits rather than bad input.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    /// True for lower-bound constructions that cannot be realized.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::BudgetInfeasible { .. } | Error::PartialCode { .. })
    }
}
