use thiserror::Error;

/// Errors produced by the ranking-kernel library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    /// The operation is only defined for top-k partial rankings.
    #[error("unsupported ranking type: {0}")]
    UnsupportedRankingType(String),

    /// Enumeration would exceed the caller's limit.
    #[error("infeasible enumeration: {what} has {size} elements, limit is {limit}")]
    Infeasible {
        what: String,
        size: String,
        limit: u128,
    },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),

    #[error("matrix is not positive semi-definite: minimum eigenvalue {min_eigenvalue:e} (dimension {dimension})")]
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
        dimension: usize,
        diagnostics: String,
    },

    #[error("herding objective has tied minimisers: {0}")]
    TiedObjective(String),

    #[error("dendrogram purity undefined: {0}")]
    UndefinedPurity(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
