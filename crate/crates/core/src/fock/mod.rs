//! Number-conserving Fock bases and sparse Bose-Hubbard operators.

mod basis;
mod lattice;
mod operator;
mod state;

use std::sync::Arc;

pub use basis::{binomial, sector_dimension, FockBasis, DEFAULT_CAPACITY};
pub use lattice::{Geometry, LatticeParams};
pub use operator::SparseHamiltonian;
pub use state::{apply, expectation, StateVector};

use crate::error::Result;

pub fn build_basis(sites: usize, particles: usize) -> Result<Arc<FockBasis>> {
    FockBasis::new(sites, particles).map(Arc::new)
}

pub fn assemble_hamiltonian(basis: &Arc<FockBasis>, params: &LatticeParams) -> Result<SparseHamiltonian> {
    SparseHamiltonian::assemble(basis.clone(), params)
}

pub fn occupation_operator(basis: &Arc<FockBasis>, site: usize) -> Result<SparseHamiltonian> {
    SparseHamiltonian::occupation(basis.clone(), site)
}

/// Diagonal interaction plus on-site energy of an occupation vector.
pub fn diagonal_energy(n: &[u8], params: &LatticeParams) -> f64 {
    n.iter()
        .zip(&params.onsite)
        .map(|(&ni, &eps)| {
            let ni = ni as f64;
            0.5 * params.interaction * ni * (ni - 1.0) + eps * ni
        })
        .sum()
}
