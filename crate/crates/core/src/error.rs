use thiserror::Error;

/// Errors raised by selection, expression compilation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence is empty")]
    EmptySequence,

    #[error("value {value} at position {position} is not finite")]
    NonFinite { position: usize, value: f64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cannot eliminate from a sequence of length 1")]
    EliminateSingleton,

    #[error("rank {rank} out of range 1..={len}")]
    RankOutOfRange { rank: usize, len: usize },

    #[error(
        "{mode} evaluation of rank {rank} over {len} values needs {required} calls, \
         over the budget of {budget}; use memo mode or raise ORDSTAT_BUDGET"
    )]
    BudgetExceeded {
        mode: &'static str,
        len: usize,
        rank: usize,
        required: u128,
        budget: u64,
    },

    #[error("variable x{0} has no assigned value")]
    MissingVariable(usize),

    #[error("evaluation produced a non-finite value at node {node}")]
    NonFiniteIntermediate { node: String },

    #[error("expression contains {0} nodes; lower it to arithmetic form first")]
    MinMaxPresent(&'static str),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid verification plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
