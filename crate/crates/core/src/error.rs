use thiserror::Error;

/// Errors shared across the matrix, planar, lift, and simulation modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix size {rows}x{cols} outside supported range 1..={max}")]
    Size { rows: usize, cols: usize, max: usize },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in numeric data")]
    NonFinite,

    #[error("invalid input: {0}")]
    Input(String),

    #[error("iteration failed to converge within {0} steps")]
    NoConvergence(usize),

    #[error("singular linear system (pivot {0:.3e})")]
    Singular(f64),

    #[error("no axis crossing within horizon {0}; the pair does not rotate trajectories")]
    NonRotating(f64),

    #[error("matrix lies outside the affine span of the family (residual {0:.3e})")]
    NotInAffineSpan(f64),

    #[error("hull coordinates ({0:.6}, {1:.6}) fall outside the unit square")]
    NotInHull(f64, f64),

    #[error("tensor factorization mismatch {observed:.3e} exceeds {limit:.3e}")]
    FactorizationFailure { observed: f64, limit: f64 },

    #[error("spectral radius {rho:.12} of a sampled periodic law is not below the decay band")]
    CounterEvidence { rho: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
