//! Crate-wide error type.

use thiserror::Error;

use crate::fields::FlowField;

/// Everything that can go wrong across geometry, kernel evaluation,
/// assembly, and solves.
#[derive(Debug, Error)]
pub enum Error {
    /// Fewer nodes than basis functions inside a kernel support.
    #[error("kernel support at ({x:.6}, {y:.6}) holds {found} nodes, need at least {needed}")]
    InsufficientNeighbors {
        x: f64,
        y: f64,
        found: usize,
        needed: usize,
    },

    /// Moment matrix could not be factorized; the local node layout does not
    /// determine the basis. No regularization is attempted.
    #[error("singular moment matrix at ({x:.6}, {y:.6}); local node layout is degenerate")]
    SingularMoment { x: f64, y: f64 },

    /// Lattice spacing does not tile a domain extent.
    #[error("spacing {h} does not divide extent {extent} on axis {axis}")]
    NonconformingSpacing { h: f64, extent: f64, axis: usize },

    /// Two nodes closer than the duplicate threshold.
    #[error("nodes {i} and {j} coincide within 1e-12")]
    DegenerateNodes { i: usize, j: usize },

    /// Operand shapes do not line up.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// Operator blocks cannot be composed at these dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Requested derivative order exceeds what the basis degree supports.
    #[error("basis degree {got} too low for the requested operator; need at least {need}")]
    DegreeTooLow { got: usize, need: usize },

    /// Row-rank certification of the collocation matrix failed.
    #[error(
        "realization check failed: rank {rank} of {rows} rows, smallest kept singular value {min_sv:.3e}"
    )]
    RealizationFailure { rank: usize, rows: usize, min_sv: f64 },

    /// Linear solver could not produce a solution within tolerance.
    #[error("linear system solve failed: {0}")]
    SingularSystem(String),

    /// Fixed-point iteration ran out of iterations. Carries the last iterate
    /// and the update-norm history so callers can inspect or continue.
    #[error("no convergence after {iterations} iterations; last relative update {last_update:.3e}")]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        field: Box<FlowField>,
        trace: Vec<f64>,
    },

    /// Problem exceeds the cap for a dense analysis path.
    #[error("{size} unknowns exceed the dense-analysis cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    /// Bad run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
