//! Exact diagonalization and chaos diagnostics for a chain of Ising-coupled
//! qubits in a gradient magnetic field, driven by rectangular Rabi pulses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod cli;
pub mod config;
pub mod eigenstates;
pub mod error;
pub mod hamiltonian;
pub mod numeric;
pub mod output;
pub mod pulse;
pub mod spacing;
pub mod spectrum;
pub mod state;
pub mod sweep;

pub use error::{ConfigError, Error, Result};
