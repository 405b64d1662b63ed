// `!(x > 0.0)` style guards are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fracnoise;
pub mod nhbasis;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod toeplitz;
pub mod verify;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
pub use nalgebra;
pub use num_complex;
