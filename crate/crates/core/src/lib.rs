//! Theta function evaluation and numerically checked theta identities.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod harness;
pub mod precision;
pub mod qseries;
pub mod theta;

pub use error::{Error, Result};
