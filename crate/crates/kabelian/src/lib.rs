//! Abelian and k-abelian complexity of substitution fixed points, computed
//! as regular sequences over Dumont-Thomas numeration systems.

pub mod algebra;
pub mod blockcode;
pub mod cli;
pub mod error;
pub mod linrep;
pub mod logic;
pub mod lrsa;
pub mod numeration;
pub mod oracle;
pub mod pipelines;
pub mod textfmt;
pub mod words;

pub use error::{Error, Result};
