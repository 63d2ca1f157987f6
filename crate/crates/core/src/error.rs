use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("prime table up to {limit} cannot factor {n}: composite cofactor {cofactor}")]
    InsufficientTable { n: u64, limit: u64, cofactor: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: u64,
        budget: u64,
    },

    #[error("index range {lower}..={upper} does not cover every a with sqrt2^a <= {x} <= sqrt2^(a+2)")]
    IncompleteCover { x: f64, lower: i64, upper: i64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
