//! Residue field and truncated Laurent series.

mod fq;
mod series;

pub use fq::{check_degree, Fq, MAX_DEGREE};
pub use series::{Series, Uniformizer};
