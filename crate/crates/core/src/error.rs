use thiserror::Error;

/// Errors produced by the solver, operators and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("dimension N={0} is not supported here (supported: 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("coincident points (separation {0:e}); the diagonal must be handled by the caller")]
    Singularity(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("grid has {nodes} nodes; dense kernels are limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("Jacobian is numerically singular (near a fold); switch to arclength parameterization")]
    NearFold,

    #[error("invalid bracket: {0}")]
    Bracket(String),

    #[error("{0}")]
    NotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
