//! Library side of the `esm` command: file formats, exit codes and the selftest.

pub mod error;
pub mod formats;
pub mod selftest;
