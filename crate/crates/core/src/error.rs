use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cannot compose: codomain of the first map has size {left} but domain of the second has size {right}")]
    Composition { left: usize, right: usize },

    #[error("invalid monotone map: {0}")]
    InvalidMap(String),

    #[error("map is not an epimorphism: {0}")]
    NotEpi(String),

    #[error("partition sum mismatch: expected {expected}, found {found}")]
    SumMismatch { expected: usize, found: usize },

    #[error("not a refinement: {0}")]
    NotRefinement(String),

    #[error("partition is degenerate: {0:?}")]
    Degenerate(Vec<usize>),

    #[error("malformed graph: {0}")]
    Graph(String),

    #[error("directed cycle through vertex {0}")]
    Cycle(usize),

    #[error("graph is not essential: vertex {0} lacks inputs or outputs")]
    NotEssential(usize),

    #[error("graph is not planar: {reason}")]
    NotPlanar { reason: String, trace: Vec<Vec<String>> },

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("algebra check failed: {0}")]
    Algebra(String),

    #[error("grade {requested} exceeds the truncation window {max}")]
    Truncation { requested: usize, max: usize },

    #[error("operator mismatch: {0}")]
    Operator(String),

    #[error("invalid automorphism family: {0}")]
    AutFamily(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
