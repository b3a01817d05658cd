use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input too short: need at least {needed}, got {got}")]
    InputTooShort { needed: usize, got: usize },

    #[error("{0}")]
    Domain(String),

    #[error("pattern {pattern} (Gray index {index}) never observed; reduce L or lengthen the window")]
    UnobservedPrefix { pattern: String, index: usize },

    #[error("computation budget exceeded: {terms} terms needed, budget is {budget}")]
    BudgetExceeded { terms: u128, budget: u128 },

    #[error("numerical range error: {0}")]
    Range(String),

    #[error("CSV parse error at row {row}: {reason}")]
    CsvParse { row: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
