//! Truncated-Fock-space linear algebra: states, inner products, tensor
//! products, density matrices, and the closed-form coherent-state overlap.
//!
//! States live on a [`HilbertSpec`], an ordered list of tensor factors.
//! Composite indices are packed row-major with the first factor major, so
//! `tensor(a, b)` places `a`'s index in the high-order position. Coherent
//! states are built in the number basis as
//!
//! ```text
//! |α⟩ = e^{-|α|²/2} Σ_n αⁿ/√(n!) |n⟩,   n < dim,
//! ```
//!
//! truncated at `dim` and renormalized; the norm² kept before
//! renormalization is reported as the truncation fidelity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tol;

/// Shape of a (possibly composite) Hilbert space: the dimension of each
/// tensor factor, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpec {
    factor_dims: Vec<usize>,
}

impl HilbertSpec {
    /// Single-factor space of dimension `dim`.
    pub fn single(dim: usize) -> Self {
        Self::new(vec![dim])
    }

    /// Composite space with the given factor dimensions.
    ///
    /// Panics if the list is empty or contains a zero dimension; those are
    /// programming errors, not runtime conditions.
    pub fn new(factor_dims: Vec<usize>) -> Self {
        assert!(!factor_dims.is_empty(), "a Hilbert space needs at least one factor");
        assert!(factor_dims.iter().all(|&d| d >= 1), "factor dimensions must be >= 1");
        Self { factor_dims }
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    /// Product of all factor dimensions.
    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Concatenated spec `self ⊗ other`.
    pub fn join(&self, other: &HilbertSpec) -> HilbertSpec {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        HilbertSpec { factor_dims: dims }
    }
}

/// Complex amplitude vector over a [`HilbertSpec`].
///
/// Every public operation that returns a `StateVector` returns one with unit
/// norm (within [`tol::NORM`]); [`StateVector::new`] is the raw constructor
/// for callers that intend to [`normalize`] afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: HilbertSpec,
    amps: Vec<C64>,
}

impl StateVector {
    /// Build a state from raw amplitudes. Checks length and finiteness only;
    /// the norm is the caller's responsibility.
    pub fn new(spec: HilbertSpec, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != spec.total_dim() {
            return Err(Error::DimensionMismatch {
                left: spec.factor_dims().to_vec(),
                right: vec![amps.len()],
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidConfig("state amplitudes must be finite".into()));
        }
        Ok(Self { spec, amps })
    }

    /// Computational basis state |index⟩.
    ///
    /// Panics if `index` is out of range.
    pub fn basis(spec: HilbertSpec, index: usize) -> Self {
        let dim = spec.total_dim();
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amps = vec![C64::ZERO; dim];
        amps[index] = C64::ONE;
        Self { spec, amps }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Euclidean norm ‖ψ‖.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub(crate) fn from_parts_unchecked(spec: HilbertSpec, amps: Vec<C64>) -> Self {
        Self { spec, amps }
    }
}

/// A coherent state truncated to a finite Fock cutoff, together with the
/// norm² the truncation kept before renormalization.
#[derive(Debug, Clone)]
pub struct CoherentState {
    pub state: StateVector,
    /// Pre-renormalization norm² of the truncated expansion; 1 means the
    /// cutoff lost nothing at f64 precision.
    pub truncation_fidelity: f64,
}

/// Default Fock cutoff for amplitudes up to `alpha_max` in magnitude:
/// `ceil(|α|² + 8|α| + 20)`. The Poisson tail beyond this cutoff keeps
/// overlap errors below 1e-8 for |α| up to roughly 10.
pub fn default_dim(alpha_max: f64) -> usize {
    let a = alpha_max.abs();
    (a * a + 8.0 * a + 20.0).ceil() as usize
}

/// Build the coherent state |α⟩ on a `dim`-dimensional Fock space.
///
/// Amplitudes follow the recurrence `c_0 = e^{-|α|²/2}`,
/// `c_{n+1} = c_n · α/√(n+1)`, which stays bounded for any α representable
/// in f64. The truncated vector is renormalized to unit norm; the weight it
/// held before renormalization is returned as the truncation fidelity.
///
/// Fails with [`Error::Truncation`] when the cutoff loses more than
/// [`tol::TRUNCATION_LOSS`] of the norm².
pub fn coherent_state(alpha: C64, dim: usize) -> Result<CoherentState> {
    assert!(dim >= 1, "coherent state needs dim >= 1");
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::from((-0.5 * alpha.norm_sqr()).exp());
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if kept < 1.0 - tol::TRUNCATION_LOSS {
        return Err(Error::Truncation { dim, kept });
    }
    let norm = kept.sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(CoherentState {
        state: StateVector {
            spec: HilbertSpec::single(dim),
            amps,
        },
        truncation_fidelity: kept,
    })
}

/// Inner product ⟨a|b⟩ with the first argument conjugated.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    require_same_spec(a, b)?;
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Closed-form overlap of two coherent states:
///
/// ```text
/// ⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + ᾱβ),   |⟨α|β⟩|² = e^{-|α-β|²}.
/// ```
pub fn coherent_overlap_closed_form(alpha: C64, beta: C64) -> C64 {
    (C64::from(-0.5 * (alpha.norm_sqr() + beta.norm_sqr())) + alpha.conj() * beta).exp()
}

/// Unit-norm copy of `s`, direction and phase preserved.
pub fn normalize(s: &StateVector) -> Result<StateVector> {
    let norm = s.norm();
    if norm <= tol::ZERO_NORM {
        return Err(Error::ZeroNorm { norm });
    }
    let amps = s.amps.iter().map(|a| a / norm).collect();
    Ok(StateVector {
        spec: s.spec.clone(),
        amps,
    })
}

/// Product state `a ⊗ b` on the concatenated spec, `a`'s index major.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    let spec = a.spec.join(&b.spec);
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    StateVector { spec, amps }
}

/// Hermitian, unit-trace, positive-semidefinite matrix on a [`HilbertSpec`].
///
/// Entries are stored dense, row-major. Instances produced by [`density_of`]
/// and [`partial_trace`] satisfy the type invariants by construction;
/// [`DensityMatrix::validate`] checks them explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    entries: Vec<C64>,
}

impl DensityMatrix {
    /// Build from dense row-major entries, checking the type invariants:
    /// Hermiticity within [`tol::HERMITICITY`], trace one within
    /// [`tol::TRACE`], eigenvalues above [`tol::PSD_FLOOR`].
    pub fn from_entries(spec: HilbertSpec, entries: Vec<C64>) -> Result<Self> {
        let dim = spec.total_dim();
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: spec.factor_dims().to_vec(),
                right: vec![entries.len()],
            });
        }
        let rho = Self { spec, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.total_dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Largest |ρ_ij| over i ≠ j.
    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        let mut max = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    max = max.max(self.entry(i, j).norm());
                }
            }
        }
        max
    }

    /// Eigenvalues in ascending order (real, since the matrix is Hermitian).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.entry(i, j));
        let mut eigs: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| a.total_cmp(b));
        eigs
    }

    /// Check Hermiticity, unit trace, and positive semidefiniteness against
    /// the pinned tolerances.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let gap = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                if gap > tol::HERMITICITY {
                    return Err(Error::InvalidConfig(format!(
                        "density matrix not Hermitian: |ρ[{i},{j}] - ρ[{j},{i}]*| = {gap:.3e}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidConfig(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min_eig = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < tol::PSD_FLOOR {
            return Err(Error::InvalidConfig(format!(
                "density matrix has eigenvalue {min_eig:.3e} below the PSD floor"
            )));
        }
        Ok(())
    }
}

/// Rank-1 projector |s⟩⟨s| as a density matrix.
pub fn density_of(s: &StateVector) -> DensityMatrix {
    let d = s.dim();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push(s.amps[i] * s.amps[j].conj());
        }
    }
    DensityMatrix {
        spec: s.spec.clone(),
        entries,
    }
}

/// Reduced density matrix on factor `keep`, tracing out every other factor.
///
/// With `outer` the combined dimension of factors before `keep`, `d` the
/// kept dimension, and `inner` the combined dimension after it, row-major
/// packing gives flat index `(o·d + a)·inner + q`, and
///
/// ```text
/// ρ_keep[a,b] = Σ_{o,q} ρ[(o·d + a)·inner + q, (o·d + b)·inner + q].
/// ```
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let factors = rho.spec.factor_dims();
    if factors.len() < 2 || keep >= factors.len() {
        return Err(Error::InvalidFactor {
            index: keep,
            factors: factors.len(),
        });
    }
    let outer: usize = factors[..keep].iter().product();
    let d = factors[keep];
    let inner: usize = factors[keep + 1..].iter().product();
    let full = rho.dim();

    let mut entries = vec![C64::ZERO; d * d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::ZERO;
            for o in 0..outer {
                for q in 0..inner {
                    let row = (o * d + a) * inner + q;
                    let col = (o * d + b) * inner + q;
                    acc += rho.entries[row * full + col];
                }
            }
            entries[a * d + b] = acc;
        }
    }
    Ok(DensityMatrix {
        spec: HilbertSpec::single(d),
        entries,
    })
}

fn require_same_spec(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::DimensionMismatch {
            left: a.spec.factor_dims().to_vec(),
            right: b.spec.factor_dims().to_vec(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::rng_stream;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Random unit state on `spec`, drawn from a seeded stream.
    fn random_state(spec: HilbertSpec, seed: u64) -> StateVector {
        let mut stream = rng_stream(seed, 0);
        let amps: Vec<C64> = (0..spec.total_dim())
            .map(|_| c(stream.next_uniform() - 0.5, stream.next_uniform() - 0.5))
            .collect();
        normalize(&StateVector::new(spec, amps).unwrap()).unwrap()
    }

    #[test]
    fn coherent_vacuum_is_fock_ground_state() {
        let v = coherent_state(C64::ZERO, 8).unwrap();
        assert_eq!(v.state.amps()[0], C64::ONE);
        assert!(v.state.amps()[1..].iter().all(|a| *a == C64::ZERO));
        assert_eq!(v.truncation_fidelity, 1.0);
    }

    #[test]
    fn coherent_truncation_fidelity_matches_poisson_head() {
        // Independent oracle: direct Poisson sum Σ_{n<32} e^{-4} 4^n / n!.
        let mut head = 0.0;
        let mut term = (-4.0f64).exp();
        for n in 0..32 {
            if n > 0 {
                term *= 4.0 / n as f64;
            }
            head += term;
        }
        let v = coherent_state(c(2.0, 0.0), 32).unwrap();
        assert!((v.truncation_fidelity - head).abs() < 1e-10);
        assert!((v.state.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_rejects_too_small_cutoff() {
        // Poisson tail with mean 4 beyond n = 5 is ~0.21, far above 1e-6.
        match coherent_state(c(2.0, 0.0), 6) {
            Err(Error::Truncation { dim: 6, kept }) => assert!(kept < 1.0 - 1e-6),
            other => panic!("expected Truncation, got {other:?}"),
        }
    }

    #[test]
    fn inner_product_of_state_with_itself_is_one() {
        let v = coherent_state(c(1.5, -0.3), 64).unwrap().state;
        let ip = inner_product(&v, &v).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10);
        assert!(ip.im.abs() < 1e-14);
    }

    #[test]
    fn vacuum_overlap_with_unit_coherent() {
        let vac = coherent_state(C64::ZERO, 64).unwrap().state;
        let one = coherent_state(C64::ONE, 64).unwrap().state;
        let ip = inner_product(&vac, &one).unwrap();
        // ⟨0|α⟩ = e^{-|α|²/2}, frozen from the closed form.
        assert!((ip.re - 0.6065306597126334).abs() < 1e-10);
        assert!(ip.im.abs() < 1e-14);
    }

    #[test]
    fn numeric_overlap_matches_closed_form() {
        let a = coherent_state(C64::ONE, 64).unwrap().state;
        let b = coherent_state(c(1.1, 0.0), 64).unwrap().state;
        let numeric = inner_product(&a, &b).unwrap();
        let exact = coherent_overlap_closed_form(C64::ONE, c(1.1, 0.0));
        assert!((numeric - exact).norm() < 1e-10);
    }

    #[test]
    fn inner_product_rejects_mismatched_spaces() {
        let a = StateVector::basis(HilbertSpec::single(2), 0);
        let b = StateVector::basis(HilbertSpec::single(3), 0);
        assert!(matches!(
            inner_product(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn closed_form_overlap_of_state_with_itself_is_one() {
        let alpha = c(2.0, -1.0);
        let ov = coherent_overlap_closed_form(alpha, alpha);
        assert!((ov - C64::ONE).norm() < 1e-14);
    }

    #[test]
    fn closed_form_overlap_probability_depends_only_on_separation() {
        // |⟨α|α+0.1⟩|² = e^{-0.01} whether the shift is real or imaginary.
        let expect = 0.9900498337491681;
        let real_shift = coherent_overlap_closed_form(c(3.0, 0.0), c(3.1, 0.0));
        assert!((real_shift.norm_sqr() - expect).abs() < 1e-12);
        let imag_shift = coherent_overlap_closed_form(C64::ZERO, c(0.0, 0.1));
        assert!((imag_shift.norm_sqr() - expect).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_identity_on_unit_vectors() {
        let v = random_state(HilbertSpec::single(5), 7);
        let w = normalize(&v).unwrap();
        for (x, y) in v.amps().iter().zip(w.amps()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn normalize_rescales_and_rejects_zero() {
        let spec = HilbertSpec::single(4);
        let doubled =
            StateVector::new(spec.clone(), vec![c(2.0, 0.0), C64::ZERO, C64::ZERO, C64::ZERO])
                .unwrap();
        let unit = normalize(&doubled).unwrap();
        assert_eq!(unit.amps()[0], C64::ONE);

        let zero = StateVector::new(spec, vec![C64::ZERO; 4]).unwrap();
        assert!(matches!(normalize(&zero), Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn tensor_ordering_is_first_factor_major() {
        let spec = HilbertSpec::single(2);
        let zero = StateVector::basis(spec.clone(), 0);
        let one = StateVector::basis(spec, 1);

        let t00 = tensor(&zero, &zero);
        assert_eq!(t00.spec().factor_dims(), &[2, 2]);
        assert_eq!(t00.amps()[0], C64::ONE);

        let t10 = tensor(&one, &zero);
        assert_eq!(t10.amps()[2], C64::ONE);
    }

    #[test]
    fn tensor_preserves_norm_of_random_unit_states() {
        for seed in 0..20 {
            let a = random_state(HilbertSpec::single(3), 100 + seed);
            let b = random_state(HilbertSpec::single(4), 200 + seed);
            assert!((tensor(&a, &b).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_of_vacuum_and_plus_state() {
        let spec = HilbertSpec::single(2);
        let vac = StateVector::basis(spec.clone(), 0);
        let rho = density_of(&vac);
        assert_eq!(rho.entry(0, 0), C64::ONE);
        assert_eq!(rho.entry(1, 1), C64::ZERO);

        let plus = normalize(&StateVector::new(spec, vec![C64::ONE, C64::ONE]).unwrap()).unwrap();
        let rho = density_of(&plus);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.entry(i, j).re - 0.5).abs() < 1e-15);
                assert!(rho.entry(i, j).im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn density_trace_is_one_for_random_states() {
        for seed in 0..20 {
            let s = random_state(HilbertSpec::single(6), 300 + seed);
            let rho = density_of(&s);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.trace().im.abs() < 1e-14);
            rho.validate().unwrap();
        }
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factor() {
        for seed in 0..20 {
            let a = random_state(HilbertSpec::single(3), 400 + seed);
            let b = random_state(HilbertSpec::single(4), 500 + seed);
            let rho = density_of(&tensor(&a, &b));

            let ra = partial_trace(&rho, 0).unwrap();
            let expect = density_of(&a);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((ra.entry(i, j) - expect.entry(i, j)).norm() < 1e-12);
                }
            }

            let rb = partial_trace(&rho, 1).unwrap();
            let expect = density_of(&b);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((rb.entry(i, j) - expect.entry(i, j)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let spec = HilbertSpec::new(vec![2, 2]);
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(
            spec.clone(),
            vec![c(inv, 0.0), C64::ZERO, C64::ZERO, c(inv, 0.0)],
        )
        .unwrap();
        let rho = density_of(&bell);
        let reduced = partial_trace(&rho, 0).unwrap();

        // Independent oracle: contract indices by explicit decomposition
        // i = 2*i0 + i1 rather than the stride arithmetic under test.
        let mut oracle = [[C64::ZERO; 2]; 2];
        for i in 0..4 {
            for j in 0..4 {
                let (i0, i1) = (i / 2, i % 2);
                let (j0, j1) = (j / 2, j % 2);
                if i1 == j1 {
                    oracle[i0][j0] += bell.amps()[i] * bell.amps()[j].conj();
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                assert!((reduced.entry(a, b) - oracle[a][b]).norm() < 1e-15);
            }
        }
        assert!((reduced.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((reduced.entry(1, 1).re - 0.5).abs() < 1e-12);
        assert!(reduced.max_off_diagonal() < 1e-15);
        reduced.validate().unwrap();
    }

    #[test]
    fn partial_trace_preserves_trace_on_random_states() {
        for seed in 0..20 {
            let s = random_state(HilbertSpec::new(vec![2, 3, 2]), 600 + seed);
            let rho = density_of(&s);
            for keep in 0..3 {
                let reduced = partial_trace(&rho, keep).unwrap();
                assert!((reduced.trace().re - 1.0).abs() < 1e-12);
                reduced.validate().unwrap();
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_factor() {
        let s = random_state(HilbertSpec::new(vec![2, 2]), 1);
        let rho = density_of(&s);
        assert!(matches!(
            partial_trace(&rho, 2),
            Err(Error::InvalidFactor { index: 2, factors: 2 })
        ));
        let single = density_of(&random_state(HilbertSpec::single(3), 2));
        assert!(matches!(
            partial_trace(&single, 0),
            Err(Error::InvalidFactor { .. })
        ));
    }

    #[test]
    fn default_dim_rule() {
        assert_eq!(default_dim(10.0), 200);
        assert_eq!(default_dim(10.1), 203);
        assert_eq!(default_dim(0.0), 20);
    }

    // Module invariants over randomized instances.

    #[test]
    fn invariant_numeric_overlap_tracks_closed_form_within_cutoff_rule() {
        let mut stream = rng_stream(0xF0CC, 0);
        for _ in 0..100 {
            let alpha = c(
                6.0 * (stream.next_uniform() - 0.5),
                6.0 * (stream.next_uniform() - 0.5),
            );
            let shift = c(
                2.0 * (stream.next_uniform() - 0.5),
                2.0 * (stream.next_uniform() - 0.5),
            );
            let shift = shift / shift.norm().max(1.0); // |β - α| ≤ 1
            let beta = alpha + shift;
            let dim = default_dim(alpha.norm().max(beta.norm()));
            let a = coherent_state(alpha, dim).unwrap().state;
            let b = coherent_state(beta, dim).unwrap().state;
            let numeric = inner_product(&a, &b).unwrap();
            let exact = coherent_overlap_closed_form(alpha, beta);
            assert!(
                (numeric - exact).norm() <= 1e-8,
                "overlap error {:.3e} for α={alpha}, β={beta}, dim={dim}",
                (numeric - exact).norm()
            );
        }
    }

    #[test]
    fn invariant_overlap_probability_is_gaussian_in_separation() {
        let mut stream = rng_stream(0xF0CD, 0);
        for _ in 0..100 {
            let beta = c(
                20.0 * (stream.next_uniform() - 0.5),
                20.0 * (stream.next_uniform() - 0.5),
            );
            let delta = c(
                3.0 * (stream.next_uniform() - 0.5),
                3.0 * (stream.next_uniform() - 0.5),
            );
            let prob = coherent_overlap_closed_form(beta, beta + delta).norm_sqr();
            let expect = (-delta.norm_sqr()).exp();
            assert!(
                (prob - expect).abs() < 1e-12 * expect.max(1e-300),
                "|⟨β|β+Δ⟩|² = {prob:.17e}, expected {expect:.17e}"
            );
        }
    }

    #[test]
    fn invariant_tensor_then_partial_trace_is_identity_on_kept_factor() {
        let mut stream = rng_stream(0xF0CE, 0);
        for trial in 0..100 {
            let da = 2 + (stream.next_uniform() * 3.0) as usize;
            let db = 2 + (stream.next_uniform() * 3.0) as usize;
            let a = random_state(HilbertSpec::single(da), 700 + trial);
            let b = random_state(HilbertSpec::single(db), 800 + trial);
            let rho = density_of(&tensor(&a, &b));
            let reduced = partial_trace(&rho, 0).unwrap();
            let expect = density_of(&a);
            for i in 0..da {
                for j in 0..da {
                    assert!((reduced.entry(i, j) - expect.entry(i, j)).norm() < 1e-12);
                }
            }
        }
    }
}
