//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide error enum. Variants carry enough context to print a
/// actionable one-line diagnostic; the CLI maps them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected the requested shape.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields (or a field and a symbol set) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A dyadic index j is outside the range stored for this grid.
    #[error("Littlewood-Paley index out of range: {0}")]
    JRange(String),

    /// The Besov triple (s, p, r) violates the admissibility condition.
    #[error("inadmissible Besov index: {0}")]
    Inadmissible(String),

    /// A wave-packet band does not fit inside the dealiased lattice.
    #[error("infeasible band: {0}")]
    InfeasibleBand(String),

    /// The bump profile fails its boundary-decay tolerance on this box.
    #[error("boundary decay failure: {0}")]
    BoundaryDecay(String),

    /// The time integrator aborted (growth guard or invalid state).
    #[error("solver abort: {0}")]
    SolverAbort(String),

    /// A scaling fit was requested with fewer than three points.
    #[error("fit needs at least 3 points: {0}")]
    FitUnderdetermined(String),

    /// Configuration file or --set override could not be parsed/validated.
    #[error("config error: {0}")]
    Config(String),

    /// Binary field dump / cache file is malformed.
    #[error("io format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
