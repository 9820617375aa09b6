use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partition has {parts} nonzero parts, more than the allowed {max}")]
    TooManyParts { parts: usize, max: usize },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("points {a} and {b} are {distance:e} apart, below the collision threshold")]
    Collision { a: usize, b: usize, distance: f64 },

    #[error("weight space dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("singular subspace has dimension {found}, expected {expected}")]
    SingularDimension { expected: usize, found: usize },

    #[error("operators do not commute (relative commutator {residual:e})")]
    NonCommuting { residual: f64 },

    #[error("no well-conditioned probe found after {retries} attempts")]
    IllConditionedProbe { retries: usize },

    #[error("eigenvalue cluster of size {cluster} has only {eigenvectors} eigenvectors")]
    NotDiagonalizable { cluster: usize, eigenvectors: usize },

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("operator does not preserve the subspace (defect {residual:e})")]
    RestrictionDefect { residual: f64 },

    #[error("Wronskian has degree {found}, expected {expected}")]
    WronskianDegree { expected: usize, found: usize },

    #[error("Wronskian leading coefficient off by relative {relative:e}")]
    LeadingCoefficient { relative: f64 },

    #[error("Wronskian roots {a} and {b} coincide (distance {distance:e})")]
    RepeatedRoots { a: usize, b: usize, distance: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
