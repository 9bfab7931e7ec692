//! Simulation of hybrid microwave entangling gates for two trapped-ion qubits
//! held in a static magnetic-field gradient.
//!
//! The crate covers the whole chain from trap constants to Bell-state
//! fidelities:
//!
//! - [`qops`]: dense operator algebra on (qubit, qubit, c.m. mode, breathing mode)
//! - [`controls`]: commensurate control schedules (detunings, carrier grid, phase flips)
//! - [`models`]: the time-dependent Hamiltonians and Bessel coefficients
//! - [`noise`]: Ornstein-Uhlenbeck fluctuations and the motional heating channel
//! - [`propagate`]: Schrödinger, master-equation and quantum-jump integrators
//! - [`analysis`]: fidelities, ensemble statistics and the Magnus oracle
//! - [`cli`]: JSON run configuration, presets, sweeps and output files

pub mod analysis;
pub mod cli;
pub mod constants;
pub mod controls;
mod error;
pub mod models;
pub mod noise;
pub mod propagate;
pub mod qops;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
