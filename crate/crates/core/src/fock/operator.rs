use std::sync::Arc;

use num_complex::Complex64;

use super::{FockBasis, LatticeParams};
use crate::error::{Error, Result};

/// Sparse operator on one particle-number sector, stored row-compressed.
///
/// Lattice Hamiltonians carry their parameters; occupation operators do not.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    basis: Arc<FockBasis>,
    params: Option<LatticeParams>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    diagonal: bool,
}

impl SparseHamiltonian {
    /// `-J Σ (e^{iφ} b†_a b_b + h.c.) + (U/2) Σ n(n-1) + Σ ε n` on `basis`.
    pub fn assemble(basis: Arc<FockBasis>, params: &LatticeParams) -> Result<Self> {
        params.validate()?;
        if params.sites != basis.sites() {
            return Err(Error::DimensionMismatch { expected: basis.sites(), found: params.sites });
        }
        let dim = basis.len();
        if dim > u32::MAX as usize {
            return Err(Error::Capacity { dim: dim as u128, cap: u32::MAX as usize });
        }
        let bonds = params.bonds();
        let forward = -params.hopping * Complex64::from_polar(1.0, params.phase);
        let backward = forward.conj();
        let half_u = 0.5 * params.interaction;

        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(dim * (2 * bonds.len() + 1));
        let mut vals = Vec::with_capacity(cols.capacity());
        let mut row: Vec<(u32, Complex64)> = Vec::with_capacity(2 * bonds.len() + 1);
        let mut target = vec![0u8; basis.sites()];
        row_start.push(0);

        for (r, n) in basis.iter().enumerate() {
            row.clear();
            let diag: f64 = n
                .iter()
                .zip(&params.onsite)
                .map(|(&ni, &eps)| {
                    let ni = ni as f64;
                    half_u * ni * (ni - 1.0) + eps * ni
                })
                .sum();
            row.push((r as u32, Complex64::new(diag, 0.0)));

            // Row r holds <n|H|m>: b†_a b_b maps m to n, so m has one more
            // particle on b and one fewer on a.
            if params.hopping != 0.0 {
                for &(a, b) in &bonds {
                    for (from, to, amp) in [(a, b, forward), (b, a, backward)] {
                        // <n| b†_from b_to |m> with m = n - e_from + e_to
                        if n[from] == 0 {
                            continue;
                        }
                        target.copy_from_slice(n);
                        target[from] -= 1;
                        target[to] += 1;
                        let c = basis.index_of(&target).expect("hopping stays in sector");
                        let weight = ((n[from] as f64) * (target[to] as f64)).sqrt();
                        row.push((c as u32, amp * weight));
                    }
                }
            }
            row.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                match cols.last() {
                    Some(&last) if cols.len() > row_start[r] && last == c => {
                        *vals.last_mut().unwrap() += v;
                    }
                    _ => {
                        cols.push(c);
                        vals.push(v);
                    }
                }
            }
            row_start.push(cols.len());
        }

        Ok(Self {
            basis,
            params: Some(params.clone()),
            row_start,
            cols,
            vals,
            diagonal: params.hopping == 0.0,
        })
    }

    /// Diagonal operator with entries `values[k]` on basis state `k`.
    pub fn from_diagonal(basis: Arc<FockBasis>, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: values.len() });
        }
        let dim = values.len();
        Ok(Self {
            basis,
            params: None,
            row_start: (0..=dim).collect(),
            cols: (0..dim as u32).collect(),
            vals: values.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            diagonal: true,
        })
    }

    /// Number operator `n̂_site`.
    pub fn occupation(basis: Arc<FockBasis>, site: usize) -> Result<Self> {
        if site >= basis.sites() {
            return Err(Error::SiteOutOfRange { site, sites: basis.sites() });
        }
        let values = basis.iter().map(|n| n[site] as f64).collect();
        Self::from_diagonal(basis, values)
    }

    /// Builds an operator from triplets. Duplicates are summed.
    pub fn from_triplets(
        basis: Arc<FockBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let dim = basis.len();
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0usize; dim + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(entries.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if prev == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c as u32);
            vals.push(v);
            row_start[r + 1] += 1;
            prev = Some((r, c));
        }
        for r in 0..dim {
            row_start[r + 1] += row_start[r];
        }
        let diagonal =
            (0..dim).all(|r| (row_start[r]..row_start[r + 1]).all(|k| cols[k] as usize == r));
        Ok(Self { basis, params: None, row_start, cols, vals, diagonal })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn params(&self) -> Option<&LatticeParams> {
        self.params.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    /// Stored entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.vals[span].iter().copied())
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|&(col, _)| col == c).map_or(Complex64::new(0.0, 0.0), |(_, v)| v)
    }

    /// Diagonal entries as reals.
    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| self.entry(r, r).re).collect()
    }

    /// Largest `|H_rc - conj(H_cr)|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Maximum absolute row sum, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = H x` without allocation.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim(), "input length");
        assert_eq!(y.len(), self.dim(), "output length");
        if self.diagonal {
            for ((yi, xi), v) in y.iter_mut().zip(x).zip(&self.vals) {
                *yi = xi * v.re;
            }
            return;
        }
        for (r, yr) in y.iter_mut().enumerate() {
            let span = self.row_start[r]..self.row_start[r + 1];
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * x[c as usize];
            }
            *yr = acc;
        }
    }

    /// Dense row-major copy, for tests and small oracles.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = self.dim();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        m
    }
}
