//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("substitution is not prolongable on letter {0}: {1}")]
    NotProlongable(usize, String),
    #[error("substitution is not primitive")]
    NotPrimitive,
    #[error("irreducibility test exceeded its degree bound (degree {0})")]
    IrreducibilityUndecided(usize),
    #[error("window length {k} exceeds prefix length {len}")]
    WindowTooLong { k: usize, len: usize },
    #[error("(vector, eigenvalue) is not an eigenpair of the incidence matrix")]
    NotAnEigenpair,
    #[error("word is not a valid representation in numeration system {0}")]
    InvalidRepresentation(String),
    #[error("recurrence polynomial is not ultimately Pisot")]
    NotUltimatelyPisot,
    #[error("state budget exceeded during automaton exploration ({0} states)")]
    StateBudgetExceeded(usize),
    #[error("numeration systems have different Pisot roots")]
    RootMismatch,
    #[error("unknown relation ${0}")]
    UnknownRelation(String),
    #[error("relation ${name} called with {got} arguments, expected {expected}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("variables {0} and {1} live in different numeration systems; use an explicit converter")]
    MixedNumerationWithoutConverter(String, String),
    #[error("track structure mismatch: {0}")]
    TrackMismatch(String),
    #[error("output value {0} is not in the automaton's output range")]
    ValueNotInRange(i64),
    #[error("cap exceeded during {what}: {detail}")]
    CapExceeded { what: String, detail: String },
    #[error("prefix too short: {0}")]
    PrefixTooShort(String),
    #[error("the length-2 block substitution is not ultimately Pisot")]
    Tau2NotUltimatelyPisot,
    #[error("unknown export format {0}")]
    UnknownFormat(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
