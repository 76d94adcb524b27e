use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The constraints admit no dataset at all.
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    /// The closed form only covers bounds-only semantics.
    #[error("attained-extremes semantics has no closed form; use the oracle module")]
    Semantics,

    #[error("mean window {window} does not intersect the bounds [{lower}, {upper}]")]
    EmptyWindow {
        window: String,
        lower: String,
        upper: String,
    },

    #[error("sum {0} is not representable on the grid")]
    NotOnGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot parse {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
