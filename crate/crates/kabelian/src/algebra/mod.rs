//! Exact algebra: integer/rational polynomials and the number field Q(theta).

pub mod field;
pub mod poly;
