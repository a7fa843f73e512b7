use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("simple-graph rejection sampling gave up after {0} retries")]
    RetriesExhausted(usize),
    #[error("instance too large: {what} = {size} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no non-uniqueness: beta {beta} <= beta_u {beta_u}")]
    NoNonuniqueness { beta: f64, beta_u: f64 },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("kernel is not reversible (detailed-balance residual {0:e})")]
    NotReversible(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
