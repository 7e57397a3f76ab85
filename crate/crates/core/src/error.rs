use thiserror::Error;

pub type Result<T> = std::result::Result<T, PkpError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PkpError {
    #[error("modulus {0} is not a prime in (2, 2^31)")]
    NotPrime(u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("matrix block is singular")]
    Singular,

    #[error("target is not in the row space of the basis")]
    NotInRowSpace,

    #[error("extended system is rank deficient: all-ones row lies in the row space of A")]
    RankDeficient,

    #[error("gave up after {0} resampling attempts")]
    ResampleLimit(usize),

    #[error("no {what} found after {iters} iterations")]
    Exhausted { what: &'static str, iters: u64 },

    #[error("{stage}: predicted size {predicted} exceeds memory cap {cap}")]
    ResourceCap {
        stage: &'static str,
        predicted: u128,
        cap: usize,
    },

    #[error("no candidate survived the final test")]
    NoSolution,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PkpError {
    fn from(e: std::io::Error) -> Self {
        PkpError::Io(e.to_string())
    }
}
