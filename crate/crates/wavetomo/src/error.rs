//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grid construction, solvers and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected the requested dimensions or extents.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields (or a field and a solver) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A subdomain or boundary-subset specification is malformed for the
    /// grid it is used with.
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    /// An averaging weight is malformed (negative values, wrong length, or
    /// integral away from one).
    #[error("invalid averaging weight: {0}")]
    InvalidWeight(String),

    /// A scalar parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A speed field must be strictly positive everywhere.
    #[error("nonpositive speed c={value} at node ({i}, {j})")]
    NonpositiveSpeed { i: usize, j: usize, value: f64 },

    /// Time-step parameters violate the stability bound or are nonsensical.
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),

    /// A boundary trace does not match the grid/boundary subset/time axis it
    /// is being combined with.
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),

    /// A field blew up (NaN/Inf) or an iterative solver failed to converge.
    #[error("solver diverged: {0}")]
    SolverDiverged(String),

    /// Relative error against an identically-zero reference is undefined.
    #[error("relative error undefined: reference field has zero norm")]
    ZeroNorm,

    /// Ray tracing or sampling could not produce a usable answer.
    #[error("ray failure: {0}")]
    RayFailure(String),

    /// File IO failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file had the right container shape but unparseable contents.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
