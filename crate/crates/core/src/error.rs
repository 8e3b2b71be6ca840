use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    /// The exhaustive enumeration would exceed the product budget.
    /// `achieved` is the largest word length that fits in the budget.
    #[error("enumeration budget of {budget} products exceeded (largest exact length {achieved})")]
    BudgetExceeded { budget: u64, achieved: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A diagonal block does not admit a certified dominant word with a
    /// unique simple leading eigenvalue.
    #[error("hypotheses unmet for block {block}: {reason}")]
    HypothesesUnmet { block: usize, reason: String },

    /// The finite-horizon dominance certificate of a block has violations.
    #[error("dominance of word {word} not certified for block {block}: {violations} violating word(s)")]
    DominanceUncertified {
        block: usize,
        word: String,
        violations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
