//! Unitary time evolution, ħ = 1 throughout.
//!
//! Only analytic forms are used: diagonal phase rotation, the 2×2 Rabi
//! rotation, and the pointer-register permutation. No dense matrix
//! exponentials.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{HilbertSpec, StateVector};

/// Hamiltonian diagonal in the computational basis: one real energy per
/// basis state, in units of rad/time.
#[derive(Debug, Clone)]
pub struct DiagonalHamiltonian {
    eigenvalues: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidConfig("Hamiltonian energies must be finite".into()));
        }
        Ok(Self { eigenvalues })
    }

    /// Harmonic ladder E_n = ω·n on a `dim`-dimensional Fock space.
    pub fn harmonic(omega: f64, dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|n| omega * n as f64).collect())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

/// Resonant two-level drive with Rabi frequency Ω, generating rotation
/// about the Bloch x-axis: the survival amplitude of |0⟩ after time t is
/// cos(Ωt/2).
#[derive(Debug, Clone, Copy)]
pub struct RabiHamiltonian {
    rabi_frequency: f64,
}

impl RabiHamiltonian {
    pub fn new(rabi_frequency: f64) -> Result<Self> {
        if !(rabi_frequency.is_finite() && rabi_frequency > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Rabi frequency must be positive and finite, got {rabi_frequency}"
            )));
        }
        Ok(Self { rabi_frequency })
    }

    pub fn rabi_frequency(&self) -> f64 {
        self.rabi_frequency
    }
}

/// Evolve under a diagonal Hamiltonian: amps[n] ← e^{-i·E_n·t}·amps[n].
pub fn evolve_diagonal(s: &StateVector, h: &DiagonalHamiltonian, t: f64) -> Result<StateVector> {
    if h.eigenvalues.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            left: s.spec().factor_dims().to_vec(),
            right: vec![h.eigenvalues.len()],
        });
    }
    let mut out = s.clone();
    for (amp, energy) in out.amps_mut().iter_mut().zip(&h.eigenvalues) {
        *amp *= C64::new(0.0, -energy * t).exp();
    }
    Ok(out)
}

/// Evolve a two-level state under the Rabi drive for time t.
pub fn evolve_rabi(s: &StateVector, h: &RabiHamiltonian, t: f64) -> Result<StateVector> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: s.spec().factor_dims().to_vec(),
            right: vec![2],
        });
    }
    let half_angle = 0.5 * h.rabi_frequency * t;
    let (cos, sin) = (half_angle.cos(), half_angle.sin());
    let (a, b) = (s.amps()[0], s.amps()[1]);
    let mut out = s.clone();
    out.amps_mut()[0] = cos * a - C64::i() * sin * b;
    out.amps_mut()[1] = -C64::i() * sin * a + cos * b;
    Ok(out)
}

/// Correlate a system with a fresh pointer register:
///
/// ```text
/// Σᵢ cᵢ|i⟩ ⊗ |0⟩  →  Σᵢ cᵢ|i⟩ ⊗ |i mod A⟩
/// ```
///
/// where the |i⟩ run over the computational basis of the whole system spec
/// and A = `apparatus_dim`. The map extends to the full composite space as
/// the permutation |i⟩⊗|j⟩ → |i⟩⊗|(j+i) mod A⟩, which is unitary; distinct
/// outcomes get distinct pointer states exactly when A ≥ system dimension,
/// so smaller registers are rejected.
pub fn premeasurement_unitary(system: &StateVector, apparatus_dim: usize) -> Result<StateVector> {
    let sys_dim = system.dim();
    if apparatus_dim < sys_dim {
        return Err(Error::ApparatusTooSmall {
            system: sys_dim,
            apparatus: apparatus_dim,
        });
    }
    let spec = system.spec().join(&HilbertSpec::single(apparatus_dim));
    let mut amps = vec![C64::ZERO; sys_dim * apparatus_dim];
    for (i, c) in system.amps().iter().enumerate() {
        amps[i * apparatus_dim + i % apparatus_dim] = *c;
    }
    Ok(StateVector::from_parts_unchecked(spec, amps))
}
