//! First-order predicate engine over multi-track automata.

pub mod compile;
pub mod dfa;
pub mod formula;
pub mod parser;
