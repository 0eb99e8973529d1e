use thiserror::Error;

use crate::cycle::CycleWitness;

/// Crate-wide error type. Verification verdicts are never errors; errors are
/// reserved for malformed inputs, violated preconditions, and search failures
/// that the caller must see.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph is not regular (degrees range {min}..{max})")]
    NotRegular { min: usize, max: usize },

    #[error("vertex set must be nonempty")]
    EmptySet,

    #[error("vertex set must be a proper nonempty subset of the vertices")]
    NotProperSubset,

    #[error("distribution length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("rejection budget exceeded after {attempts} attempts")]
    RejectionBudget { attempts: usize },

    #[error("exact mode supports n <= {limit}, got n = {n}")]
    ExactTooLarge { n: usize, limit: usize },

    #[error("hypothesis not met: {have} well-mixing vertices, {need} required")]
    HypothesisNotMet { have: usize, need: usize },

    #[error("no expander core found at this constant: peeling exhausted the graph")]
    NoExpanderCore,

    #[error(
        "no cycle of length >= {required} found (best found: {}); \
         the neighborhood-condition precondition should be re-examined",
        best.as_ref().map_or(0, |c| c.len())
    )]
    CycleContract {
        required: usize,
        best: Option<CycleWitness>,
    },

    #[error("unknown configuration key: {0}")]
    UnknownConfigKey(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
