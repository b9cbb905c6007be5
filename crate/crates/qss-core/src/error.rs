use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Params(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("quotient undefined: {0}")]
    UndefinedQuotient(String),

    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("quadratic form has no negative direction (determinant {delta:.3e})")]
    NoNegativeDirection { delta: f64 },

    #[error("search failed: {0}")]
    Search(String),

    #[error("state became nonfinite during time stepping")]
    Overflow,

    #[error("unsupported: {0}")]
    Unsupported(String),
}
