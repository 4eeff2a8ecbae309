//! zenolab: a numerical laboratory for repeated-measurement quantum
//! dynamics on truncated Fock spaces.
//!
//! The library covers four connected pieces:
//!
//! - [`fock`] — states on truncated Fock and tensor-product spaces, inner
//!   products, density matrices, partial traces, and the closed-form
//!   coherent-state overlap ⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + ᾱβ).
//! - [`dynamics`] — analytic unitary evolution: diagonal Hamiltonians, the
//!   two-level Rabi rotation, and the system-pointer entangling map.
//! - [`measure`] — binary projective measurements with Born probabilities,
//!   collapse, and seeded, splittable randomness.
//! - [`protocol`] — repeated-measurement experiments built from the above:
//!   amplitude drag, the cyclically swept measurement basis, decay freezing
//!   by frequent observation, and the system-pointer measurement chain, each
//!   with closed-form oracles and Monte Carlo ensembles.
//!
//! The [`cli`] module backs the `zenolab` binary: it parses TOML run
//! configurations and writes per-step CSV records plus a summary document.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod measure;
pub mod protocol;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
