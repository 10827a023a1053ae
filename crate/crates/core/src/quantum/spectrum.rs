use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::SparseHamiltonian;

/// Dense size limits for full diagonalization.
#[derive(Debug, Clone, Copy)]
pub struct DenseCaps {
    pub values_only: usize,
    pub with_vectors: usize,
}

impl Default for DenseCaps {
    fn default() -> Self {
        Self { values_only: 30_000, with_vectors: 8_000 }
    }
}

/// Eigenvalues in ascending order and, optionally, orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    // column-major: vector j occupies [j*dim, (j+1)*dim)
    vectors: Option<Vec<Complex64>>,
    dim: usize,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Eigenvector `j`, if vectors were computed.
    pub fn vector(&self, j: usize) -> Option<&[Complex64]> {
        self.vectors.as_ref().map(|v| &v[j * self.dim..(j + 1) * self.dim])
    }

    /// Component `<n|ψ_j>`. Panics without vectors.
    pub fn component(&self, n: usize, j: usize) -> Complex64 {
        self.vectors.as_ref().expect("spectrum computed without eigenvectors")[j * self.dim + n]
    }

    /// Largest `‖Hψ - Eψ‖` over all pairs.
    pub fn max_residual(&self, h: &SparseHamiltonian) -> Option<f64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut worst: f64 = 0.0;
        for (j, &e) in self.values.iter().enumerate() {
            let v = self.vector(j)?;
            h.apply_into(v, &mut out);
            let r: f64 = out.iter().zip(v).map(|(hv, v)| (hv - v * e).norm_sqr()).sum();
            worst = worst.max(r.sqrt());
        }
        Some(worst)
    }
}

pub fn diagonalize(h: &SparseHamiltonian, want_vectors: bool) -> Result<Spectrum> {
    diagonalize_with_caps(h, want_vectors, DenseCaps::default())
}

pub fn diagonalize_with_caps(
    h: &SparseHamiltonian,
    want_vectors: bool,
    caps: DenseCaps,
) -> Result<Spectrum> {
    let dim = h.dim();
    let cap = if want_vectors { caps.with_vectors } else { caps.values_only };
    if dim > cap {
        return Err(Error::Capacity { dim: dim as u128, cap });
    }
    let scale = h.norm_bound().max(1.0);
    let asymmetry = h.hermiticity_defect();
    if asymmetry > 1e-12 * scale {
        return Err(Error::NonHermitian { asymmetry });
    }
    let real = (0..dim).all(|r| h.row(r).all(|(_, v)| v.im == 0.0));
    let failed = |e: faer::linalg::evd::EvdError| Error::LinearAlgebra(format!("{e:?}"));

    if real {
        let mut a = Mat::<f64>::zeros(dim, dim);
        for r in 0..dim {
            for (c, v) in h.row(r) {
                a[(r, c)] = v.re;
            }
        }
        if !want_vectors {
            let values = a.self_adjoint_eigenvalues(Side::Lower).map_err(failed)?;
            return Ok(Spectrum { values, vectors: None, dim });
        }
        let evd = a.self_adjoint_eigen(Side::Lower).map_err(failed)?;
        let values = (0..dim).map(|j| evd.S()[j]).collect();
        let u = evd.U();
        let mut vectors = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            vectors.extend((0..dim).map(|i| Complex64::new(u[(i, j)], 0.0)));
        }
        Ok(Spectrum { values, vectors: Some(vectors), dim })
    } else {
        let mut a = Mat::<Complex64>::zeros(dim, dim);
        for r in 0..dim {
            for (c, v) in h.row(r) {
                a[(r, c)] = v;
            }
        }
        if !want_vectors {
            let values = a.self_adjoint_eigenvalues(Side::Lower).map_err(failed)?;
            return Ok(Spectrum { values, vectors: None, dim });
        }
        let evd = a.self_adjoint_eigen(Side::Lower).map_err(failed)?;
        let values = (0..dim).map(|j| evd.S()[j].re).collect();
        let u = evd.U();
        let mut vectors = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            vectors.extend((0..dim).map(|i| u[(i, j)]));
        }
        Ok(Spectrum { values, vectors: Some(vectors), dim })
    }
}
