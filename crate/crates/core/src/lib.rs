//! Stein-method upper bounds on Wasserstein distances to the standard
//! Gaussian, and empirical Wasserstein distances to check them against.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod hermite;
pub mod clt;
pub mod diagnostics;
pub mod harness;
pub mod mc;
pub mod ou;
pub mod stein_bound;
pub mod tensor;
pub mod wasserstein;

pub use error::{Error, Result};
