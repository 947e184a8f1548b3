//! Exact computations for a wild quadratic extension in characteristic 2:
//! finite affine Deligne-Lusztig point sets, their trace formula, and the
//! induced-type side of the comparison with Bushnell-Henniart types.

pub mod adlv;
pub mod algebra;
pub mod chars;
pub mod error;
pub mod gl2;
pub mod groups;
pub mod suites;
pub mod tower;
pub mod traces_geo;
pub mod types_bh;

pub use error::{Error, Result};
