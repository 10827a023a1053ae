//! Quantum chaos in Bose-Hubbard lattices.
//!
//! Exact Fock-space dynamics and spectra, the mean-field limit with its
//! stability analysis, truncated Wigner sampling, the Fock-space random wave
//! model and random-matrix spectral statistics.

pub mod error;
pub mod fock;
pub mod meanfield;
pub mod quantum;
pub mod rwm;
pub mod spectral;
pub mod twa;

mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library version, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
