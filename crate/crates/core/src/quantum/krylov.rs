use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{SparseHamiltonian, StateVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Gauss-Legendre nodes and weights on [0, 1] for the error integral.
const GL_NODES: [f64; 6] = [
    0.033_765_242_898_423_99,
    0.169_395_306_766_867_74,
    0.380_690_406_958_401_56,
    0.619_309_593_041_598_4,
    0.830_604_693_233_132_3,
    0.966_234_757_101_576,
];
const GL_WEIGHTS: [f64; 6] = [
    0.085_662_246_189_585_17,
    0.180_380_786_524_069_3,
    0.233_956_967_286_345_5,
    0.233_956_967_286_345_5,
    0.180_380_786_524_069_3,
    0.085_662_246_189_585_17,
];

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Largest Krylov subspace per substep.
    pub max_dim: usize,
    pub max_substeps: usize,
    /// Orthogonalize every new Lanczos vector against all previous ones.
    pub full_reorthogonalization: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { max_dim: 60, max_substeps: 200_000, full_reorthogonalization: true }
    }
}

impl KrylovOptions {
    /// Dimension above which plain three-term Lanczos replaces full
    /// reorthogonalization, whose cost grows with the subspace size.
    pub const REORTHOGONALIZATION_LIMIT: usize = 4096;

    /// Options suited to vectors of length `dim`. Large sectors use a
    /// shorter subspace without reorthogonalization; the a-posteriori bound
    /// still controls the step length.
    pub fn for_dimension(dim: usize) -> Self {
        if dim <= Self::REORTHOGONALIZATION_LIMIT {
            Self::default()
        } else {
            Self { max_dim: 40, full_reorthogonalization: false, ..Self::default() }
        }
    }
}

/// Work counters of one propagation call.
#[derive(Debug, Clone, Copy, Default)]
pub struct PropagationStats {
    pub substeps: usize,
    pub matvecs: usize,
}

/// Small tridiagonal matrix diagonalized once; `exp(-i T s) e_1` is then
/// cheap for any `s`.
struct TridiagonalExp {
    values: Vec<f64>,
    // first and last components of each eigenvector
    first: Vec<f64>,
    last: Vec<f64>,
    vectors: Mat<f64>,
}

impl TridiagonalExp {
    fn new(alpha: &[f64], beta: &[f64]) -> Result<Self> {
        let k = alpha.len();
        let mut t = Mat::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i + 1, i)] = beta[i];
                t[(i, i + 1)] = beta[i];
            }
        }
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("tridiagonal eigensolver: {e:?}")))?;
        let values = (0..k).map(|i| evd.S()[i]).collect();
        let u = evd.U();
        let first = (0..k).map(|i| u[(0, i)]).collect();
        let last = (0..k).map(|i| u[(k - 1, i)]).collect();
        Ok(Self { values, first, last, vectors: u.to_owned() })
    }

    /// `|e_k^T exp(-i T s) e_1|`
    fn corner(&self, s: f64) -> f64 {
        self.values
            .iter()
            .zip(self.first.iter().zip(&self.last))
            .map(|(&lam, (&f, &l))| Complex64::from_polar(f * l, -lam * s))
            .sum::<Complex64>()
            .norm()
    }

    /// Bound on the error of the Krylov approximation over a step `s`:
    /// `beta_k ∫_0^|s| |e_k^T exp(-i T u) e_1| du`.
    fn error(&self, beta_next: f64, s: f64) -> f64 {
        let integral: f64 =
            GL_NODES.iter().zip(&GL_WEIGHTS).map(|(&x, &w)| w * self.corner(x * s)).sum();
        beta_next * integral * s.abs()
    }

    fn coefficients(&self, s: f64) -> Vec<Complex64> {
        let k = self.values.len();
        let mut c = vec![ZERO; k];
        for (j, &lam) in self.values.iter().enumerate() {
            let w = Complex64::from_polar(self.first[j], -lam * s);
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += w * self.vectors[(i, j)];
            }
        }
        c
    }
}

/// Short-time Lanczos propagator `exp(-iHt)` with adaptive substeps.
///
/// The Krylov basis of one substep does not depend on the step length, so
/// each substep takes the longest step whose error bound fits its share
/// `tol · |dt| / |t|` of the total budget.
pub struct Propagator<'a> {
    h: &'a SparseHamiltonian,
    opts: KrylovOptions,
    basis: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    breakdown: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(h: &'a SparseHamiltonian) -> Self {
        Self::with_options(h, KrylovOptions::for_dimension(h.dim()))
    }

    pub fn with_options(h: &'a SparseHamiltonian, opts: KrylovOptions) -> Self {
        let breakdown = 1e-13 * h.norm_bound().max(1e-300);
        Self { h, opts, basis: Vec::new(), scratch: vec![ZERO; h.dim()], breakdown }
    }

    pub fn hamiltonian(&self) -> &SparseHamiltonian {
        self.h
    }

    /// Replaces `psi` by `exp(-iHt) psi`.
    pub fn evolve(&mut self, psi: &mut [Complex64], t: f64, tol: f64) -> Result<PropagationStats> {
        if psi.len() != self.h.dim() {
            return Err(Error::DimensionMismatch { expected: self.h.dim(), found: psi.len() });
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("propagation time {t} is not finite")));
        }
        if !(tol > 1e-14 && tol < 1e-4) {
            return Err(Error::InvalidParameter(format!("tolerance {tol:e} outside (1e-14, 1e-4)")));
        }
        let mut stats = PropagationStats::default();
        let total = t.abs();
        if total == 0.0 {
            return Ok(stats);
        }
        let dim = psi.len();
        let m_max = self.opts.max_dim.clamp(2, dim.max(2));
        while self.basis.len() <= m_max {
            self.basis.push(vec![ZERO; dim]);
        }
        let mut done = 0.0;
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);

        while done < total {
            stats.substeps += 1;
            if stats.substeps > self.opts.max_substeps {
                return Err(Error::NoConvergence(format!(
                    "Krylov propagation exceeded {} substeps at t = {done}",
                    self.opts.max_substeps
                )));
            }
            let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(stats);
            }
            for (b, p) in self.basis[0].iter_mut().zip(psi.iter()) {
                *b = p / norm;
            }
            alpha.clear();
            beta.clear();
            let remaining = total - done;
            let mut accepted: Option<(TridiagonalExp, f64)> = None;

            for j in 0..m_max {
                let (head, tail) = self.basis.split_at_mut(j + 1);
                let w = &mut tail[0];
                self.h.apply_into(&head[j], w);
                stats.matvecs += 1;
                let a = dot(&head[j], w).re;
                axpy(-Complex64::new(a, 0.0), &head[j], w);
                if j > 0 {
                    axpy(-Complex64::new(beta[j - 1], 0.0), &head[j - 1], w);
                }
                if self.opts.full_reorthogonalization {
                    for v in head.iter() {
                        let c = dot(v, w);
                        axpy(-c, v, w);
                    }
                }
                alpha.push(a);
                let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                let k = j + 1;

                if b <= self.breakdown || k == dim {
                    // invariant subspace: exact for any step length
                    accepted = Some((TridiagonalExp::new(&alpha, &beta)?, remaining));
                    break;
                }
                if k % 4 == 0 || k == m_max {
                    let texp = TridiagonalExp::new(&alpha, &beta)?;
                    let budget = |s: f64| 0.5 * tol * s / total;
                    if texp.error(b, remaining) <= budget(remaining) {
                        accepted = Some((texp, remaining));
                        break;
                    }
                    if k == m_max {
                        let step = largest_step(|s| texp.error(b, s) <= budget(s), remaining);
                        if step <= remaining * 1e-12 {
                            return Err(Error::NoConvergence(format!(
                                "Krylov step underflow at t = {done}"
                            )));
                        }
                        accepted = Some((texp, step));
                        break;
                    }
                }
                beta.push(b);
                let inv = 1.0 / b;
                tail[0].iter_mut().for_each(|x| *x *= inv);
            }

            let (texp, step) = accepted.expect("loop always accepts at the last dimension");
            let coeffs = texp.coefficients(step * t.signum());
            self.scratch.iter_mut().for_each(|x| *x = ZERO);
            for (c, v) in coeffs.iter().zip(&self.basis) {
                axpy(c * norm, v, &mut self.scratch);
            }
            psi.copy_from_slice(&self.scratch);
            done = if remaining - step <= 1e-15 * total { total } else { done + step };
        }
        Ok(stats)
    }

    /// Evolves `psi` along an increasing time grid starting at `start`,
    /// calling `visit(k, state)` at each grid time.
    pub fn for_each_time(
        &mut self,
        psi: &mut [Complex64],
        start: f64,
        times: &[f64],
        tol: f64,
        mut visit: impl FnMut(usize, &[Complex64]) -> Result<()>,
    ) -> Result<()> {
        let mut now = start;
        for (k, &t) in times.iter().enumerate() {
            self.evolve(psi, t - now, tol)?;
            now = t;
            visit(k, psi)?;
        }
        Ok(())
    }
}

fn largest_step(ok: impl Fn(f64) -> bool, upper: f64) -> f64 {
    let mut hi = upper;
    let mut lo = 0.0;
    // shrink geometrically until the bound holds, then bisect back up
    for _ in 0..200 {
        hi *= 0.5;
        if ok(hi) {
            lo = hi;
            hi *= 2.0;
            break;
        }
    }
    if lo == 0.0 {
        return 0.0;
    }
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[inline]
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub(crate) fn axpy(c: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// `exp(-iHt) v` to accuracy `tol · ‖v‖`.
pub fn propagate(h: &SparseHamiltonian, v: &StateVector, t: f64, tol: f64) -> Result<StateVector> {
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: v.len() });
    }
    let mut out = v.clone();
    Propagator::new(h).evolve(out.amplitudes_mut(), t, tol)?;
    Ok(out)
}
