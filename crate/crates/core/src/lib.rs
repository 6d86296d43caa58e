//! Unitary pre-measurement of a non-degenerate sharp observable coupled to
//! one bosonic apparatus mode, in the coherent-state parametric
//! representation, cross-checked against a truncated Fock-space oracle.
//!
//! * [`model`]: parameters, amplitudes, density matrices.
//! * [`dynamics`]: coherent branch orbits, phases, overlaps, exact `ρ_Γ(t)`.
//! * [`precs`]: phase-space fields `h^γ`, `χ²`, reconstruction of `ρ_Γ`,
//!   differential entropy, ε-supports and readout.
//! * [`fock`]: the brute-force reference.
//! * [`config`], [`cli`]: batch front end.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod model;
pub mod precs;
pub mod sum;

pub use error::{Error, Result};
