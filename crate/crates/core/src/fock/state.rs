use std::sync::Arc;

use num_complex::Complex64;

use super::{FockBasis, SparseHamiltonian};
use crate::error::{Error, Result};

/// Complex amplitudes over one particle-number sector.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidParameter("state has non-finite amplitudes".into()));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        Self { basis, amplitudes }
    }

    /// The Fock state `|n>`.
    pub fn fock(basis: Arc<FockBasis>, n: &[u8]) -> Result<Self> {
        let k = basis.index_of(n).ok_or_else(|| {
            Error::InvalidParameter(format!("occupation {n:?} is not in the sector"))
        })?;
        let mut v = Self::zeros(basis);
        v.amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= c);
    }

    /// Returns `self - other`.
    pub fn sub(&self, other: &StateVector) -> StateVector {
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a - b).collect();
        StateVector { basis: self.basis.clone(), amplitudes }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `op · v` as a new state.
pub fn apply(op: &SparseHamiltonian, v: &StateVector) -> Result<StateVector> {
    if v.len() != op.dim() || v.basis().sites() != op.basis().sites() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: v.len() });
    }
    let mut out = StateVector::zeros(op.basis().clone());
    op.apply_into(v.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// `<v|op|v>`.
pub fn expectation(op: &SparseHamiltonian, v: &StateVector) -> Result<Complex64> {
    Ok(v.inner(&apply(op, v)?))
}
