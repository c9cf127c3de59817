use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network layout: {0}")]
    InvalidLayout(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch between parameters and gradient")]
    ShapeMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("stencil needs at least {needed} nodes, field has {available}")]
    TooFewNodes { needed: usize, available: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("x = {x} lies outside the domain [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("strategy `{strategy}` cannot be used with the {problem} problem")]
    IncompatibleStrategy {
        problem: &'static str,
        strategy: &'static str,
    },

    #[error("relative error is undefined: reference vector is identically zero")]
    ZeroReference,

    #[error("training diverged at epoch {epoch}: term `{term}` is not finite")]
    Diverged { epoch: usize, term: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
