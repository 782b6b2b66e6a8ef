use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("polygon is not convex at vertex {0}")]
    NonConvex(usize),
    #[error("polygon boundary intersects itself (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("group is not transitive on its domain")]
    NonTransitive,
    #[error("non-generic parameters: {0}")]
    NonGeneric(String),
    #[error("path tracking failed at loop parameter {theta:.6}: {reason}")]
    TrackingFailure { theta: f64, reason: String },
    #[error("degenerate curve parameters: {0}")]
    DegenerateParameters(String),
    #[error("domain of size {size} exceeds the limit {limit}")]
    DomainTooLarge { size: usize, limit: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
