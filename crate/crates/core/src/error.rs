use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("point ({x}, {y}) lies outside the closed domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("face of strip {strip} at {coord} is an interior interface, not boundary")]
    InteriorInterface { strip: usize, coord: f64 },

    #[error("no boundary correction found within {0} pushes (step too large)")]
    ReflectionFailed(usize),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("invalid operator: {0}")]
    Operator(String),

    #[error("invalid noise model: {0}")]
    Noise(String),

    #[error("under-resolved grid: {0}")]
    UnderResolved(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("increment log mismatch: {0}")]
    LogMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
