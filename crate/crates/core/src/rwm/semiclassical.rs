use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::bessel::{bessel_j_orders, signed_order};
use super::covariance::{CovarianceMatrix, Provenance};
use super::window::GaussianWindow;
use crate::error::{invalid, Error, Result};
use crate::fock::LatticeParams;
use crate::quadrature::gauss_legendre;

type DiagonalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Ingredients of the Bessel-product covariance: hopping, bonds and the
/// diagonal energy evaluated on midpoint occupations `I = (n + m)/2`.
#[derive(Clone)]
pub struct SemiclassicalModel {
    pub hopping: f64,
    pub bonds: Vec<(usize, usize)>,
    pub sites: usize,
    diagonal: Arc<DiagonalFn>,
}

impl std::fmt::Debug for SemiclassicalModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiclassicalModel")
            .field("hopping", &self.hopping)
            .field("bonds", &self.bonds)
            .finish_non_exhaustive()
    }
}

impl SemiclassicalModel {
    /// Bose-Hubbard model with `E_diag(I) = (U/2) Σ I(I−1) + Σ ε I`.
    pub fn from_params(params: &LatticeParams) -> Result<Self> {
        params.validate()?;
        if params.phase != 0.0 {
            return Err(invalid("the Bessel-product covariance is derived for zero gauge phase"));
        }
        let (u, eps) = (params.interaction, params.onsite.clone());
        let diagonal = move |occ: &[f64]| -> f64 {
            occ.iter().zip(&eps).map(|(&i, &e)| 0.5 * u * i * (i - 1.0) + e * i).sum()
        };
        Ok(Self::with_diagonal(params, Arc::new(diagonal)))
    }

    /// Same hopping structure with any diagonal energy function.
    pub fn with_diagonal(params: &LatticeParams, diagonal: Arc<DiagonalFn>) -> Self {
        Self { hopping: params.hopping, bonds: params.bonds(), sites: params.sites, diagonal }
    }

    pub fn diagonal_energy(&self, occupations: &[f64]) -> f64 {
        (self.diagonal)(occupations)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SemiclassicalOptions {
    /// Winding sum truncated at `|Q| ≤ q_max`.
    pub q_max: i64,
    /// Relative size of the two extra winding orders above which the sum
    /// counts as unconverged.
    pub tail_tol: f64,
    /// `W̃` is integrated where it exceeds this value.
    pub cutoff: f64,
    /// Gauss-Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Phase advance of the fastest oscillation across one panel.
    pub panel_phase: f64,
}

impl Default for SemiclassicalOptions {
    fn default() -> Self {
        Self { q_max: 12, tail_tol: 1e-8, cutoff: 1e-14, nodes_per_panel: 16, panel_phase: 3.0 }
    }
}

/// `R^sc_{n,m}(E) = (1/ρ) Σ_Q ∫ dτ/2π W̃(τ) e^{iτ(E − E_diag(I))}
/// Π_bonds i^{k} J_k(2Jτ√(I_a I_b))`, with `k = δ_bond + Q`,
/// `I = (n+m)/2` and `δ_bond` the net transfer `Σ_{β≤a}(n_β − m_β)` across
/// the bond.
pub fn semiclassical_covariance(
    n: &[u8],
    m: &[u8],
    energy: f64,
    model: &SemiclassicalModel,
    window: &GaussianWindow,
    level_density: f64,
    opts: &SemiclassicalOptions,
) -> Result<Complex64> {
    let l = model.sites;
    if n.len() != l || m.len() != l {
        return Err(Error::DimensionMismatch { expected: l, found: n.len().max(m.len()) });
    }
    if n.iter().map(|&x| x as u32).sum::<u32>() != m.iter().map(|&x| x as u32).sum::<u32>() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !(level_density > 0.0) {
        return Err(invalid("level density must be positive"));
    }
    let mid: Vec<f64> = n.iter().zip(m).map(|(&a, &b)| 0.5 * (a as f64 + b as f64)).collect();
    let mut transfer = Vec::with_capacity(l);
    let mut acc = 0i64;
    for (&a, &b) in n.iter().zip(m) {
        acc += a as i64 - b as i64;
        transfer.push(acc);
    }
    // Per bond: Bessel argument rate and net transfer.
    let bonds: Vec<(f64, i64)> = model
        .bonds
        .iter()
        .map(|&(a, b)| (2.0 * model.hopping * (mid[a] * mid[b]).sqrt(), transfer[a]))
        .collect();
    // Sites without a bond behind them (open ends) still constrain the
    // transfer: their Bessel factor is J_k(0).
    let mut free_ends = Vec::new();
    for a in 0..l {
        if !model.bonds.iter().any(|&(x, _)| x == a) {
            free_ends.push(transfer[a]);
        }
    }
    let detuning = energy - model.diagonal_energy(&mid);
    let tau_max = window.support(opts.cutoff);
    let rate: f64 = detuning.abs() + bonds.iter().map(|b| b.0.abs()).sum::<f64>() + window.width;
    let panels = ((2.0 * tau_max * rate / opts.panel_phase).ceil() as usize).max(2);
    let (nodes, weights) = gauss_legendre(opts.nodes_per_panel);
    let h = 2.0 * tau_max / panels as f64;

    let q_max = opts.q_max;
    let q_ext = q_max + 2;
    let max_order = bonds.iter().map(|b| b.1.unsigned_abs()).max().unwrap_or(0) as usize + q_ext as usize;
    let mut run = vec![Vec::new(); bonds.len()];
    let mut main = Complex64::new(0.0, 0.0);
    let mut tail = Complex64::new(0.0, 0.0);
    let phase_of = |k: i64| match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };

    for p in 0..panels {
        let left = -tau_max + h * p as f64;
        for (x, w) in nodes.iter().zip(&weights) {
            let tau = left + 0.5 * h * (x + 1.0);
            let envelope = window.transform(tau) * w * 0.5 * h;
            let carrier = Complex64::from_polar(envelope, tau * detuning);
            for (r, &(rate, _)) in run.iter_mut().zip(&bonds) {
                bessel_j_orders((rate * tau).abs(), max_order, r);
            }
            let negative = tau < 0.0;
            for q in -q_ext..=q_ext {
                if free_ends.iter().any(|&d| d + q != 0) {
                    continue;
                }
                let mut prod = Complex64::new(1.0, 0.0);
                for (r, &(rate, d)) in run.iter().zip(&bonds) {
                    let k = d + q;
                    prod *= phase_of(k) * signed_order(r, k, negative != (rate < 0.0));
                }
                if q.abs() <= q_max {
                    main += carrier * prod;
                } else {
                    tail += carrier * prod;
                }
            }
        }
    }
    let norm = 1.0 / (2.0 * PI * level_density);
    let value = main * norm;
    let tail = tail * norm;
    // relative to the size of a diagonal entry, so tiny off-diagonal values
    // do not demand a tail far below rounding
    let scale = value.norm().max(window.weight(0.0) / level_density);
    if tail.norm() > opts.tail_tol * scale {
        return Err(Error::NoConvergence(format!(
            "winding sum not converged at q_max = {q_max} (tail {:e})",
            tail.norm()
        )));
    }
    Ok(value)
}

/// Semiclassical covariance over a state list, entries evaluated in parallel.
pub fn semiclassical_matrix(
    states: &[Vec<u8>],
    energy: f64,
    model: &SemiclassicalModel,
    window: &GaussianWindow,
    level_density: f64,
    opts: &SemiclassicalOptions,
) -> Result<CovarianceMatrix> {
    let n = states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let entries: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            semiclassical_covariance(&states[a], &states[b], energy, model, window, level_density, opts)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for (&(a, b), v) in pairs.iter().zip(entries) {
        values[a * n + b] = v;
        values[b * n + a] = v.conj();
    }
    Ok(CovarianceMatrix {
        states: states.to_vec(),
        values,
        provenance: Provenance::Semiclassical,
        states_in_window: None,
        warnings: Vec::new(),
    })
}
