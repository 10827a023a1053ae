//! Reference implementations used only by the test suites. Nothing here
//! shares code with the library: the Hamiltonian is built from a hash map
//! over an independently enumerated basis and all dense linear algebra goes
//! through nalgebra.

#![allow(dead_code)]

use std::collections::HashMap;
use std::io::Write;

use fockchaos::fock::{Geometry, LatticeParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Dense = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// All occupation tuples of `particles` bosons on `sites` sites, in no
/// particular order.
pub fn enumerate_states(sites: usize, particles: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, left: usize, sites: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == sites {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k as u8);
            rec(prefix, left - k, sites, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), particles, sites, &mut out);
    out
}

/// Dense Bose-Hubbard matrix over `states`, written out from
/// `b†_a b_b |n> = √(n_b (n_a + 1)) |n + e_a − e_b>`.
pub fn dense_hamiltonian(params: &LatticeParams, states: &[Vec<u8>]) -> Dense {
    let index: HashMap<&[u8], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let dim = states.len();
    let mut h = Dense::zeros(dim, dim);
    let l = params.sites;
    let mut links: Vec<(usize, usize)> = (0..l - 1).map(|a| (a, a + 1)).collect();
    if params.geometry == Geometry::Ring && l > 2 {
        links.push((l - 1, 0));
    }
    let forward = -params.hopping * Complex64::from_polar(1.0, params.phase);
    for (col, n) in states.iter().enumerate() {
        let mut diag = 0.0;
        for (site, &k) in n.iter().enumerate() {
            let k = k as f64;
            diag += 0.5 * params.interaction * k * (k - 1.0) + params.onsite[site] * k;
        }
        h[(col, col)] += c(diag, 0.0);
        for &(a, b) in &links {
            // b†_a b_b and its conjugate b†_b b_a
            for (to, from, amp) in [(a, b, forward), (b, a, forward.conj())] {
                if n[from] == 0 {
                    continue;
                }
                let mut m = n.clone();
                let weight = (n[from] as f64 * (n[to] as f64 + 1.0)).sqrt();
                m[from] -= 1;
                m[to] += 1;
                let row = index[m.as_slice()];
                h[(row, col)] += amp * weight;
            }
        }
    }
    h
}

/// Eigen-decomposition of a Hermitian matrix, used to exponentiate.
pub struct DenseEvolution {
    pub energies: Vec<f64>,
    pub vectors: Dense,
}

impl DenseEvolution {
    pub fn new(h: &Dense) -> Self {
        let eig = h.clone().symmetric_eigen();
        Self { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    /// `e^{-iHt}` as a dense matrix.
    pub fn propagator(&self, t: f64) -> Dense {
        let dim = self.energies.len();
        let phases = Dense::from_fn(dim, dim, |r, k| {
            self.vectors[(r, k)] * Complex64::from_polar(1.0, -self.energies[k] * t)
        });
        &phases * self.vectors.adjoint()
    }
}

/// Scaling-and-squaring Taylor series for `e^{A}`.
pub fn expm(a: &Dense) -> Dense {
    let dim = a.nrows();
    let norm = a.iter().map(|x| x.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / Complex64::from(2f64.powi(squarings as i32));
    let mut term = Dense::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / Complex64::from(k as f64);
        sum += &term;
        if term.iter().map(|x| x.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Ordinary least squares `y ≈ a + b x`, returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Prints one result line and returns whether it passed. Writes to the
/// stdout handle directly so the line survives the test harness capture.
pub fn report(name: &str, pass: bool, detail: &str) -> bool {
    let line = format!("[{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes()).and_then(|()| out.flush());
    pass
}
