//! Translation-invariant Lindblad dissipators for a 1D quantum harmonic
//! oscillator.
//!
//! The crate builds jump operators of the form `e^{-iκx} f(p)` on a truncated
//! Fock space, assembles the corresponding Liouvillians, solves for their
//! steady states, and measures how closely those steady states approximate
//! thermal Gibbs states. Phase-space diagnostics (Wigner and Blokhintsev
//! functions) and closed-form rate checks (friction, diffusion, energy
//! relaxation, position diffusion) are included, together with a declarative
//! experiment runner exposed through the `tidiss` CLI.

pub mod config;
pub mod diagnostics;
pub mod dissipator;
pub mod experiment;
pub mod fock;
pub mod liouvillian;
pub mod plot;
pub mod profile;
pub mod table;
pub mod thermo;
pub mod units;

mod error;

pub use error::{Error, Result};
pub use fock::{
    build_canonical_operators, build_hamiltonian, displacement_phase, func_of_hermitian,
    CanonicalOps, DensityMatrix, Operator,
};
pub use units::UnitSystem;
