//! Binary yes/no measurements {P, 1−P} with P = |target⟩⟨target|: Born
//! probabilities, collapse, and reproducible randomness.
//!
//! Randomness comes from one pinned generator: ChaCha8 keyed by
//! `seed_from_u64(master_seed)` with the 64-bit stream counter set to the
//! stream id. Uniform draws take the top 53 bits of each 64-bit output,
//! giving values on the 2⁻⁵³ grid in [0, 1). Identical `(seed, id)` pairs
//! reproduce identical sequences on every platform; distinct ids give
//! independent streams, so ensemble results cannot depend on worker
//! scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{normalize, StateVector};
use crate::tol;

/// Outcome of a binary measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOutcome {
    Yes,
    No,
}

impl BinaryOutcome {
    pub fn is_yes(self) -> bool {
        matches!(self, BinaryOutcome::Yes)
    }

    /// Lowercase label used in CSV records.
    pub fn label(self) -> &'static str {
        match self {
            BinaryOutcome::Yes => "yes",
            BinaryOutcome::No => "no",
        }
    }
}

/// One seeded uniform stream; see the module docs for the pinned generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Next uniform draw in [0, 1).
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Deterministic uniform stream for `(master_seed, stream_id)`.
pub fn rng_stream(master_seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    RngStream { rng }
}

/// How a binary measurement picks its branch.
///
/// `Sample` draws from the owned stream and answers yes iff the draw falls
/// below the Born probability. The forced modes select a branch
/// unconditionally while still reporting the Born probability; forcing the
/// yes branch realizes post-selection on an all-yes record.
#[derive(Debug, Clone)]
pub enum DecisionPolicy {
    Sample(RngStream),
    ForceYes,
    ForceNo,
}

/// Result of one binary measurement: the branch taken, the Born probability
/// of the yes branch, and the collapsed state.
#[derive(Debug, Clone)]
pub struct MeasurementResult {
    pub outcome: BinaryOutcome,
    pub probability_yes: f64,
    pub post_state: StateVector,
}

/// Born probability |⟨target|s⟩|², clamped into [0, 1] against rounding
/// overshoot of order 1e-16.
pub fn born_probability(s: &StateVector, target: &StateVector) -> Result<f64> {
    let amp = crate::fock::inner_product(target, s)?;
    Ok(amp.norm_sqr().clamp(0.0, 1.0))
}

/// Measure the projector onto `target` against its complement.
///
/// The yes branch collapses to `target` verbatim, phase included, which
/// keeps repeated runs bit-reproducible; Born probabilities are insensitive
/// to that phase choice. The no branch collapses to the normalized
/// projection of `s` off `target`. Selecting a branch whose probability is
/// below [`tol::DEGENERATE_BRANCH`] is an error: the renormalized vector
/// would be rounding noise.
pub fn binary_measure(
    s: &StateVector,
    target: &StateVector,
    policy: &mut DecisionPolicy,
) -> Result<MeasurementResult> {
    let probability_yes = born_probability(s, target)?;
    let yes = match policy {
        DecisionPolicy::Sample(stream) => stream.next_uniform() < probability_yes,
        DecisionPolicy::ForceYes => true,
        DecisionPolicy::ForceNo => false,
    };

    let post_state = if yes {
        if probability_yes < tol::DEGENERATE_BRANCH {
            return Err(Error::DegenerateBranch {
                probability: probability_yes,
            });
        }
        target.clone()
    } else {
        let probability_no = 1.0 - probability_yes;
        if probability_no < tol::DEGENERATE_BRANCH {
            return Err(Error::DegenerateBranch {
                probability: probability_no,
            });
        }
        let overlap = crate::fock::inner_product(target, s)?;
        let mut residual = s.clone();
        for (r, t) in residual.amps_mut().iter_mut().zip(target.amps()) {
            *r -= overlap * t;
        }
        normalize(&residual)?
    };

    Ok(MeasurementResult {
        outcome: if yes { BinaryOutcome::Yes } else { BinaryOutcome::No },
        probability_yes,
        post_state,
    })
}
