use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("degenerate polynomial: {0}")]
    DegeneratePoly(String),
    #[error("branch tracking failed to resolve interval [{lo}, {hi}] after bisection limit")]
    BisectionLimit { lo: f64, hi: f64 },
    #[error("non-real roots where real roots were required")]
    NonReal,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("unclassifiable configuration: {0}")]
    Unclassifiable(String),
    #[error("quadrature tail too large: {0}")]
    Tail(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
