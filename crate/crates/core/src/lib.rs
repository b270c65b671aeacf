//! Lindblad simulation of capacitively coupled transmon qubits (two or three,
//! treated as two-level systems) with classical disorder in the coupling
//! strengths and noise rates.
//!
//! Modules, bottom up:
//! - [`qops`]: dense operators, Pauli/ladder catalog, basis and W states
//! - [`model`]: lab-frame, rotating-frame and rotating-wave Hamiltonians
//! - [`dynamics`]: master-equation generator, adaptive integrator, and a
//!   matrix-exponential reference propagator
//! - [`disorder`]: seeded per-realization draws and ensemble averaging
//! - [`measures`]: populations, concurrence, W fidelity, event extraction
//! - [`runner`]: scenario catalog, config files, CSV/JSON/SVG output

pub mod disorder;
pub mod dynamics;
mod error;
pub mod measures;
pub mod model;
pub mod qops;
pub mod runner;

pub use error::{Error, Result};
