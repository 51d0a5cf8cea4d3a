//! Dirac Hamiltonian and relativistic time operator on spectral lattices.
//!
//! Natural units `hbar = c = 1` are used throughout. The crate builds the
//! Clifford generators ([`algebra`]), discretized position/momentum
//! representations ([`grid`]), the operators `H_D`, `T` and `K`
//! ([`operators`]), exact evolution in time and energy ([`dynamics`]), and
//! uncertainty/frequency analysis ([`analysis`]). [`verify`] bundles every
//! identity into one deterministic report.

pub mod algebra;
pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
mod fft;
pub mod grid;
pub mod operators;
pub mod params;
pub mod verify;

pub use algebra::{DiracMatrices, SpinMatrix, C64};
pub use error::{Error, Result};
pub use grid::{GridSpec, Representation, SpinorField};
pub use operators::DiracSystem;
pub use params::PhysParams;
