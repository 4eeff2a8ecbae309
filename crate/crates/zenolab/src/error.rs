//! Error type shared by all simulator modules.

use thiserror::Error;

/// Errors produced by state construction, evolution, and measurement.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two states or operators live on different spaces.
    #[error("dimension mismatch between spaces {left:?} and {right:?}")]
    DimensionMismatch { left: Vec<usize>, right: Vec<usize> },

    /// The Fock cutoff is too small for the requested coherent amplitude:
    /// the truncated expansion keeps less than `1 - 1e-6` of the norm².
    #[error("Fock truncation at dim {dim} keeps only {kept:.12} of the norm² (needs ≥ 1 - 1e-6)")]
    Truncation { dim: usize, kept: f64 },

    /// Attempted to normalize a vector with norm at or below `1e-14`.
    #[error("cannot normalize a state with norm {norm:.3e}")]
    ZeroNorm { norm: f64 },

    /// A partial trace addressed a tensor factor that does not exist.
    #[error("factor index {index} out of range for a {factors}-factor space")]
    InvalidFactor { index: usize, factors: usize },

    /// The pointer register cannot label every system basis state.
    #[error("apparatus dimension {apparatus} is smaller than system dimension {system}")]
    ApparatusTooSmall { system: usize, apparatus: usize },

    /// The selected measurement branch has probability below `1e-14`, so the
    /// collapsed state would be dominated by rounding noise.
    #[error("selected measurement branch has probability {probability:.3e}")]
    DegenerateBranch { probability: f64 },

    /// A protocol configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
