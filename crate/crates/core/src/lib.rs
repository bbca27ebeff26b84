//! Oracle-based mixed-integer convex optimization.
//!
//! Points live in `R^n x R^d` with the first `n` coordinates integer
//! constrained. Bodies are accessed through separation oracles and objectives
//! through first-order oracles.

pub mod branchcut;
pub mod error;
pub mod geometry;
pub mod infolab;
pub mod lattice;
pub mod lp;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
