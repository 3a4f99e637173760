use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A rank outside the half-integer domain `{1, 1.5, 2, ...}`.
    #[error("invalid rank {0}: ranks are half-integers >= 1")]
    InvalidRank(String),

    /// A score function was asked to evaluate a rank it does not cover.
    #[error("rank {rank} is outside the domain of the {function} score function")]
    Domain { function: String, rank: String },

    /// Mismatched lengths or parameters outside an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid score function: {0}")]
    InvalidFunction(String),

    #[error("degenerate score function: f({n}) equals f(1)")]
    DegenerateFunction { n: u32 },

    #[error("scoring table is not strictly increasing: rank {lower} -> {lower_points}, rank {upper} -> {upper_points}")]
    TableDegeneracy {
        lower: u32,
        upper: u32,
        lower_points: i64,
        upper_points: i64,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("competitor sets differ: {0}")]
    CompetitorMismatch(String),

    #[error("exact arithmetic overflow while computing {0}")]
    Overflow(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
