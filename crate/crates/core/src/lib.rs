//! Truncated Fock-space simulator for two-mode squeezing generated by a
//! strongly driven three-level Λ atom inside a two-mode cavity.
//!
//! The crate builds three Hamiltonian layers on the same composite space
//! (atom ⊗ mode 1 ⊗ mode 2):
//!
//! * the drive-frame Hamiltonian with resonant drives and cavity detunings
//!   ([`model::build_lab_hamiltonian`]),
//! * the dressed interaction-picture Hamiltonian after the secular
//!   approximation ([`model::build_interaction_hamiltonian`]),
//! * the effective two-mode squeezing Hamiltonian obtained by eliminating the
//!   detuned dressed-state transition ([`model::build_effective_hamiltonian`]),
//!
//! propagates states under each of them ([`propagate`]), and scores the cavity
//! state with the Duan sum-variance witness ([`observables`]) against a
//! closed-form two-mode squeezed vacuum ([`oracle`]).

pub mod error;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod propagate;
pub mod runner;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Largest modulus among complex entries (0 for an empty input).
pub fn max_modulus<'a>(values: impl IntoIterator<Item = &'a C64>) -> f64 {
    values.into_iter().map(|v| v.norm()).fold(0.0, f64::max)
}
