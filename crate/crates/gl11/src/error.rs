use thiserror::Error;

/// Errors produced by the graded linear algebra core and the model layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parity labels must be 0 or 1, got {0}")]
    BadParity(u8),

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("factor index {index} out of range for a chain of {len} factors")]
    FactorOutOfRange { index: usize, len: usize },

    #[error("duplicate interpolation node {0}")]
    DuplicateNode(String),

    #[error("{needed} interpolation nodes needed for degree bound {degree}, got {got}")]
    TooFewNodes {
        needed: usize,
        degree: usize,
        got: usize,
    },

    #[error("boundary operation requires open boundary conditions")]
    RequiresOpenBoundary,

    #[error("Grassmann structure violated: {0}")]
    GrassmannStructure(String),

    #[error("normalization factor {factor} vanishes at u = {at} (|{factor}| = {magnitude:.3e})")]
    DegenerateNormalization {
        factor: String,
        at: String,
        magnitude: f64,
    },

    #[error("evaluation point {at} is within {distance:.3e} of a zero of Q; shift the node")]
    NearQZero { at: String, distance: f64 },

    #[error("parameters violate the generic-position requirement: {0}")]
    DegenerateParameters(String),

    #[error("root finding failed to converge after {sweeps} sweeps (max residual {residual:.3e})")]
    RootsNotConverged { sweeps: usize, residual: f64 },

    #[error("unpaired Bethe root {root} under the lambda <-> -lambda-eta involution")]
    UnpairedRoot { root: String },

    #[error("certification supports N <= {max} for {kind} chains, got N = {n}")]
    CertificationSize {
        kind: &'static str,
        max: usize,
        n: usize,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
