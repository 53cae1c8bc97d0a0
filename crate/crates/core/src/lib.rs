//! Numerical simulator for chains of large half-integer-spin nanomagnets.
//!
//! The low-lying `|±S>` levels of each magnet act as a weakly coupled memory,
//! the `|±1/2>` levels as a strongly coupled data bus. The crate builds the
//! full chain Hamiltonian and the two effective Hamiltonians, propagates
//! states (Krylov or dense), integrates the dephasing master equation and
//! simulates the resonant pulse that moves a magnet between the two sectors.
//!
//! Units: `hbar = 1`, energies in units of the exchange constant `J`, times
//! in `1/J`.

pub mod dynamics;
mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod pulses;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default largest Hilbert-space dimension any builder will allocate.
pub const DEFAULT_MAX_DIM: usize = 1 << 21;

/// Largest block handed to the dense Hermitian eigensolver.
pub const DENSE_CAP: usize = 4096;
