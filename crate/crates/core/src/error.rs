use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite integrand value {value} at node {index} {node:?}")]
    NonFinite {
        index: usize,
        node: Vec<f64>,
        value: f64,
    },

    #[error("root finder did not converge along direction {direction:?} from {origin:?}")]
    RootFinder { origin: Vec<f64>, direction: Vec<f64> },

    #[error("insufficient smoothness/kmax: expansion tail {tail:.3e} exceeds threshold {threshold:.3e} (raise kmax)")]
    ExpansionTail { tail: f64, threshold: f64 },

    #[error("zonal harmonic of degree {degree} vanishes at every reference angle")]
    DegenerateMultiplier { degree: usize },

    #[error("not an intersection body of a star body: {0}")]
    NotIntersectionBodyOfStarBody(String),

    #[error("body has no symmetry axis; a zonal method needs an axially symmetric body")]
    NotAxial,

    #[error("invalid body spec: {0}")]
    Spec(String),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
