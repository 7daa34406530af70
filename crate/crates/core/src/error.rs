use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exponential enumeration hit one of the [`WordBudget`](crate::WordBudget) limits.
    #[error("budget exhausted at word length {word_length}: {reason} ({products} products formed)")]
    BudgetExhausted {
        word_length: usize,
        products: u64,
        reason: BudgetLimit,
    },

    #[error("lift dimension {dimension} exceeds the cap of {cap}")]
    DimensionCapExceeded { dimension: u128, cap: usize },

    #[error("tolerance not met after {iterations} iterations")]
    ToleranceNotMet { iterations: usize },
}

/// Which limit of a [`WordBudget`](crate::WordBudget) was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetLimit {
    WordLength,
    WordCount,
    WallClock,
}

impl std::fmt::Display for BudgetLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BudgetLimit::WordLength => "maximum word length",
            BudgetLimit::WordCount => "maximum word count",
            BudgetLimit::WallClock => "wall-clock cap",
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
