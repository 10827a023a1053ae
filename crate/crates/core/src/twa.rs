//! Truncated Wigner approximation: Gaussian sampling of coherent states and
//! ensemble averages of classical symbols along mean-field trajectories.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fock::LatticeParams;
use crate::meanfield::{advance, augmented_rhs, classical_hamiltonian, FlowOptions, Gauss6};
use crate::quantum::check_grid;

/// Wigner samples `Ψ = b + ζ` of a product coherent state.
#[derive(Debug, Clone)]
pub struct WignerEnsemble {
    pub center: Vec<Complex64>,
    pub samples: Vec<Vec<Complex64>>,
    pub seed: u64,
}

impl WignerEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Standard deviation of each real quadrature of the Wigner noise, so that
/// `E|ζ_j|² = 1/2`.
pub const QUADRATURE_STD: f64 = 0.5;

/// Draws sample `index` from its own ChaCha stream, so any subset of the
/// ensemble can be regenerated independently.
fn draw(center: &[Complex64], seed: u64, index: u64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let noise = Normal::new(0.0, QUADRATURE_STD).expect("finite width");
    center
        .iter()
        .map(|b| b + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect()
}

pub fn sample_wigner(center: &[Complex64], n_samples: usize, seed: u64) -> Result<WignerEnsemble> {
    if n_samples == 0 {
        return Err(invalid("need at least one Wigner sample"));
    }
    let samples = (0..n_samples as u64).map(|k| draw(center, seed, k)).collect();
    Ok(WignerEnsemble { center: center.to_vec(), samples, seed })
}

type SymbolFn = dyn Fn(&[Complex64]) -> f64 + Send + Sync;

/// Phase-space function averaged over the ensemble.
#[derive(Clone)]
pub enum Symbol {
    /// Weyl symbol of `n̂_j`: `|ψ_j|² − 1/2`.
    Occupation(usize),
    /// Weyl symbol of `N̂`: `Σ|ψ_j|² − L/2`.
    TotalNumber,
    /// Plain `Σ|ψ_j|²`, the symbol whose mean is `N̄ + L/2`.
    FieldNorm,
    /// Weyl symbol of the Bose-Hubbard Hamiltonian.
    Energy,
    /// `q_j = √2 Re ψ_j`.
    PositionQuadrature(usize),
    /// `p_j = √2 Im ψ_j`.
    MomentumQuadrature(usize),
    Custom(Arc<SymbolFn>),
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Occupation(j) => write!(f, "Occupation({j})"),
            Symbol::TotalNumber => write!(f, "TotalNumber"),
            Symbol::FieldNorm => write!(f, "FieldNorm"),
            Symbol::Energy => write!(f, "Energy"),
            Symbol::PositionQuadrature(j) => write!(f, "PositionQuadrature({j})"),
            Symbol::MomentumQuadrature(j) => write!(f, "MomentumQuadrature({j})"),
            Symbol::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Symbol {
    fn check(&self, sites: usize) -> Result<()> {
        match *self {
            Symbol::Occupation(j) | Symbol::PositionQuadrature(j) | Symbol::MomentumQuadrature(j)
                if j >= sites =>
            {
                Err(Error::SiteOutOfRange { site: j, sites })
            }
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, psi: &[Complex64], params: &LatticeParams) -> f64 {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        match self {
            Symbol::Occupation(j) => psi[*j].norm_sqr() - 0.5,
            Symbol::TotalNumber => norm - 0.5 * psi.len() as f64,
            Symbol::FieldNorm => norm,
            Symbol::Energy => weyl_energy(psi, params),
            Symbol::PositionQuadrature(j) => std::f64::consts::SQRT_2 * psi[*j].re,
            Symbol::MomentumQuadrature(j) => std::f64::consts::SQRT_2 * psi[*j].im,
            Symbol::Custom(f) => f(psi),
        }
    }
}

/// Lattice whose Gross-Pitaevskii flow is generated by the Weyl symbol of
/// the Bose-Hubbard Hamiltonian. The symbol of `(U/2) n(n−1)` is
/// `(U/2)(|ψ|⁴ − 2|ψ|² + 1/2)`, so the flow sees on-site energies `ε − U`.
pub fn weyl_flow_params(params: &LatticeParams) -> LatticeParams {
    let shifted = params.onsite.iter().map(|e| e - params.interaction).collect();
    params.clone().with_onsite(shifted)
}

/// Weyl symbol of the Bose-Hubbard Hamiltonian.
pub fn weyl_energy(psi: &[Complex64], params: &LatticeParams) -> f64 {
    let constant: f64 = params.onsite.iter().map(|e| 0.25 * params.interaction - 0.5 * e).sum();
    classical_hamiltonian(psi, &weyl_flow_params(params)) + constant
}

#[derive(Debug, Clone, Copy)]
pub struct TwaOptions {
    pub flow: FlowOptions,
    /// Samples per parallel batch; bounds memory for long grids.
    pub batch: usize,
}

impl Default for TwaOptions {
    fn default() -> Self {
        Self { flow: FlowOptions::with_dt(0.01), batch: 2048 }
    }
}

/// Ensemble mean of a real quantity on a time grid.
#[derive(Debug, Clone)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

/// Integrates each sample with the Weyl-symbol flow and evaluates
/// `observe(k, ψ(t_k))` on the grid. Batches run in parallel; the reduction
/// runs in sample order, so results do not depend on the thread count.
fn ensemble_average<F>(
    samples: &(dyn Fn(usize) -> Vec<Complex64> + Sync),
    count: usize,
    params: &LatticeParams,
    times: &[f64],
    opts: &TwaOptions,
    observe: F,
) -> Result<EnsembleSeries>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    check_grid(times)?;
    if times[0] < 0.0 {
        return Err(invalid("TWA times must be non-negative"));
    }
    let flow_params = weyl_flow_params(params);
    let nt = times.len();
    let mut sum = vec![0.0; nt];
    let mut sum_sq = vec![0.0; nt];
    let batch = opts.batch.max(1);
    for first in (0..count).step_by(batch) {
        let last = (first + batch).min(count);
        let rows: Vec<Vec<f64>> = (first..last)
            .into_par_iter()
            .map(|s| -> Result<Vec<f64>> {
                let mut psi = samples(s);
                let mut rhs = augmented_rhs(&flow_params, 0);
                let mut stepper = Gauss6::new(psi.len(), opts.flow.stage_tol);
                let mut now = 0.0;
                let mut row = Vec::with_capacity(nt);
                for &t in times {
                    advance(&mut stepper, &mut psi, now, t - now, opts.flow.dt, &mut rhs, &mut |_, _| {})
                        .map_err(|e| Error::SampleFailed { sample: s, source: Box::new(e) })?;
                    now = t;
                    row.push(observe(&psi));
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        for row in rows {
            for (k, x) in row.into_iter().enumerate() {
                sum[k] += x;
                sum_sq[k] += x * x;
            }
        }
    }
    let n = count as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| {
            if count < 2 {
                0.0
            } else {
                ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt()
            }
        })
        .collect();
    Ok(EnsembleSeries { times: times.to_vec(), mean, std_error, samples: count })
}

/// `⟨A(t)⟩ ≈ E[A(Ψ(t))]` over the ensemble.
pub fn twa_expectation(
    symbol: &Symbol,
    ensemble: &WignerEnsemble,
    params: &LatticeParams,
    times: &[f64],
    opts: &TwaOptions,
) -> Result<EnsembleSeries> {
    params.validate()?;
    if ensemble.center.len() != params.sites {
        return Err(Error::DimensionMismatch { expected: params.sites, found: ensemble.center.len() });
    }
    symbol.check(params.sites)?;
    let fetch = |s: usize| ensemble.samples[s].clone();
    ensemble_average(&fetch, ensemble.len(), params, times, opts, |psi| symbol.evaluate(psi, params))
}

/// Squared distances beyond this contribute below `e^{-80}` to the return
/// estimator and are skipped.
const RETURN_CUTOFF: f64 = 40.0;

/// Return probability from the overlap of evolved Wigner samples with the
/// initial Wigner function, `C(t) ≈ 2^L E[exp(−2|Ψ(t) − b|²)]`.
///
/// The initial Wigner function is `∝ exp(−2|ψ − b|²)`; its overlap with
/// itself is `2^{−L}`, so the factor `2^L` gives `C(0) = 1`.
pub fn twa_return(
    center: &[Complex64],
    params: &LatticeParams,
    times: &[f64],
    n_samples: usize,
    seed: u64,
    opts: &TwaOptions,
) -> Result<EnsembleSeries> {
    params.validate()?;
    if center.len() != params.sites {
        return Err(Error::DimensionMismatch { expected: params.sites, found: center.len() });
    }
    if n_samples == 0 {
        return Err(invalid("need at least one Wigner sample"));
    }
    let scale = 2f64.powi(params.sites as i32);
    let fetch = |s: usize| draw(center, seed, s as u64);
    ensemble_average(&fetch, n_samples, params, times, opts, |psi| {
        let d: f64 = psi.iter().zip(center).map(|(z, b)| (z - b).norm_sqr()).sum();
        if d > RETURN_CUTOFF {
            0.0
        } else {
            scale * (-2.0 * d).exp()
        }
    })
}
