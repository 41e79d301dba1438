//! Exact distribution of the leading generalized eigenvalue of a singular
//! complex F-matrix under a rank-one spiked alternative, the ROC of the
//! resulting detector, and a Monte Carlo oracle to check both against.

pub mod cdf;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod monte_carlo;
mod multiprec;
pub mod roc;
pub mod special;

pub use error::{Error, Result};
