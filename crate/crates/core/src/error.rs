use thiserror::Error;

use crate::flow::Orbit;

/// Errors raised by scene construction, propagation and the verification tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bump {index}: {reason}")]
    InvalidBump { index: usize, reason: String },

    #[error("bumps {0} and {1} intersect or touch")]
    Overlap(usize, usize),

    #[error("operation needs at least two bumps")]
    SingleBump,

    #[error("a straight line meets bumps {0}, {1} and {2}")]
    CollinearBumps(usize, usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("magnetic field strength must be nonzero")]
    ZeroField,

    #[error("Larmor circle stays inside bump {0}")]
    InteriorTrapped(usize),

    #[error("propagation limit exceeded after {} events", .0.events.len())]
    LimitExceeded(Box<Orbit>),

    #[error("state is not in the domain of the Poincare map: {0}")]
    NotInDomain(String),

    #[error("orbit escapes to infinity")]
    Escaped,

    #[error("glancing contact with bump {0}")]
    Glancing(usize),

    #[error("near-glancing crossing at bump {0} (|<v,N>| = {1:e})")]
    GlancingNearby(usize, f64),

    #[error("field regime of bump {0} is neither weak nor strong")]
    IndeterminateRegime(usize),

    #[error("bump {0} does not carry a strong field")]
    NotStrong(usize),

    #[error("scene does not satisfy the very strong field inequalities")]
    NotVeryStrong,

    #[error("grid too coarse: direction increment {increment:.3} at L = {at:.6}")]
    GridTooCoarse { at: f64, increment: f64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("orbit has no bump events")]
    NoEvents,

    #[error("word {0} is not admissible")]
    NotAdmissible(String),

    #[error("direction {0:.6} is parallel to a line meeting two bumps")]
    ExcludedDirection(f64),

    #[error("no convergence (best residual {best_residual:e}): {detail}")]
    NoConvergence { best_residual: f64, detail: String },

    #[error("no orbit found: {0}")]
    NotFound(String),

    #[error("scene config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
