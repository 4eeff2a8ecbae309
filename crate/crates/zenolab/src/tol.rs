//! Numerical tolerances, pinned in one place.
//!
//! All are sized for IEEE 754 f64 at space dimensions up to a few thousand:
//! exact analytic operations (diagonal phases, 2×2 rotations, permutations)
//! accumulate only a handful of ulps, so the thresholds below leave several
//! orders of magnitude of headroom.

/// Unit-norm check on any state returned by a public operation.
pub const NORM: f64 = 1e-10;

/// Entrywise Hermiticity check on operators and density matrices.
pub const HERMITICITY: f64 = 1e-12;

/// Trace-one check on density matrices.
pub const TRACE: f64 = 1e-10;

/// Smallest admissible density-matrix eigenvalue (rounding can push a
/// mathematically zero eigenvalue slightly negative).
pub const PSD_FLOOR: f64 = -1e-10;

/// Maximum norm² a coherent state may lose to Fock truncation before
/// construction fails. Together with the default cutoff rule
/// `dim = ceil(|α|² + 8|α| + 20)` this keeps overlap errors below 1e-8
/// for amplitudes up to |α| ≈ 10.
pub const TRUNCATION_LOSS: f64 = 1e-6;

/// Norm threshold below which a vector cannot be meaningfully normalized.
pub const ZERO_NORM: f64 = 1e-14;

/// Probability threshold below which a measurement branch is degenerate:
/// renormalizing the branch would amplify noise beyond meaning.
pub const DEGENERATE_BRANCH: f64 = 1e-14;
