use crate::specfun::SpecFunError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error(transparent)]
    SpecFun(#[from] SpecFunError),

    #[error("probe disk is resonant at order {order}: |C_n| = {modulus:.3e}")]
    Resonance { order: i64, modulus: f64 },

    #[error("series did not converge below order {max_order}")]
    Truncation { max_order: usize },

    #[error("least-squares solve failed (condition estimate {condition:.3e})")]
    Solver { condition: f64 },

    #[error("coincident source and field point")]
    Coincident,
}

pub type Result<T> = std::result::Result<T, Error>;
