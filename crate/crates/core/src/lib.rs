// `!(x > 0.0)` is used throughout so that NaN is rejected with the same branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod disk;
pub mod elastic;
pub mod error;
pub mod esm;
pub mod mfs;
pub mod specfun;

pub use error::{Error, Result};
