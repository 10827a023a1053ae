use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use super::krylov::Propagator;
use super::series::uniform_grid;
use crate::error::{invalid, Error, Result};
use crate::fock::{build_basis, diagonal_energy, FockBasis, LatticeParams, SparseHamiltonian, StateVector};

/// Final states that define the incoherent background of the return
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    /// Translates `T^k n_i` with `2k ≠ 0 mod L`. They are classically
    /// equivalent to `n_i` but no time-reversal symmetry maps a path onto
    /// them, so they carry the incoherent return probability.
    Translations,
    /// Fock states whose diagonal energy lies within `width` of the initial
    /// one, excluding `n_i` and all its translates and reflections.
    EnergyShell { width: f64 },
}

#[derive(Debug, Clone)]
pub struct CbsOptions {
    /// Averaging window `[start, end]`.
    pub window: (f64, f64),
    pub samples: usize,
    /// Earliest admissible window start.
    pub equilibration: f64,
    pub background: Background,
    pub tol: f64,
    /// Relative drift between window halves above which a point is
    /// flagged non-stationary.
    pub drift_limit: f64,
}

impl CbsOptions {
    /// Window `[20, 40]/J` sampled at 41 times, translation background.
    pub fn for_hopping(hopping: f64) -> Self {
        let j = hopping.abs().max(f64::MIN_POSITIVE);
        Self {
            window: (20.0 / j, 40.0 / j),
            samples: 41,
            equilibration: 20.0 / j,
            background: Background::Translations,
            tol: 1e-8,
            drift_limit: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CbsPoint {
    pub phase: f64,
    /// Return probability over background.
    pub enhancement: f64,
    pub return_probability: f64,
    pub background: f64,
    pub background_states: usize,
    pub window_times: usize,
    /// Relative difference of the return probability between window halves.
    pub drift: f64,
    pub stationary: bool,
}

/// Time-averaged return probability of a Fock state against a background
/// of equivalent final states, one point per gauge phase.
pub fn cbs_experiment(
    params: &LatticeParams,
    initial: &[u8],
    phases: &[f64],
    opts: &CbsOptions,
) -> Result<Vec<CbsPoint>> {
    params.validate()?;
    if initial.len() != params.sites {
        return Err(Error::DimensionMismatch { expected: params.sites, found: initial.len() });
    }
    let (start, end) = opts.window;
    if !(start < end) || opts.samples < 2 {
        return Err(invalid("CBS window needs start < end and at least two samples"));
    }
    if start < opts.equilibration {
        return Err(invalid(format!(
            "CBS window starts at {start} before the equilibration time {}",
            opts.equilibration
        )));
    }
    let particles: usize = initial.iter().map(|&n| n as usize).sum();
    let basis = build_basis(params.sites, particles)?;
    let origin = basis.index_of(initial).expect("occupations sum to the sector");
    let targets = background_states(&basis, initial, params, opts.background);
    if targets.is_empty() {
        return Err(Error::Empty("CBS background set".into()));
    }
    let times = uniform_grid(start, end, opts.samples);

    phases
        .par_iter()
        .map(|&phase| {
            let p = params.clone().with_phase(phase);
            let h = SparseHamiltonian::assemble(basis.clone(), &p)?;
            let mut v = StateVector::fock(basis.clone(), initial)?;
            let mut mean = vec![0.0; basis.len()];
            let mut returns = Vec::with_capacity(times.len());
            Propagator::new(&h).for_each_time(v.amplitudes_mut(), 0.0, &times, opts.tol, |_, psi| {
                for (m, a) in mean.iter_mut().zip(psi) {
                    *m += a.norm_sqr();
                }
                returns.push(psi[origin].norm_sqr());
                Ok(())
            })?;
            let count = times.len() as f64;
            let ret = mean[origin] / count;
            let background = targets.iter().map(|&k| mean[k]).sum::<f64>() / (count * targets.len() as f64);
            let half = returns.len() / 2;
            let first = returns[..half].iter().sum::<f64>() / half as f64;
            let second = returns[half..].iter().sum::<f64>() / (returns.len() - half) as f64;
            let drift = (first - second).abs() / ret.max(f64::MIN_POSITIVE);
            Ok(CbsPoint {
                phase,
                enhancement: ret / background,
                return_probability: ret,
                background,
                background_states: targets.len(),
                window_times: times.len(),
                drift,
                stationary: drift < opts.drift_limit,
            })
        })
        .collect()
}

fn translate(n: &[u8], k: usize) -> Vec<u8> {
    let l = n.len();
    (0..l).map(|j| n[(j + l - k % l) % l]).collect()
}

/// Indices of the background final states.
pub fn background_states(
    basis: &Arc<FockBasis>,
    initial: &[u8],
    params: &LatticeParams,
    background: Background,
) -> Vec<usize> {
    let l = initial.len();
    let origin = basis.index_of(initial);
    match background {
        Background::Translations => {
            let set: BTreeSet<usize> = (1..l)
                .filter(|&k| (2 * k) % l != 0)
                .filter_map(|k| basis.index_of(&translate(initial, k)))
                .filter(|&idx| Some(idx) != origin)
                .collect();
            set.into_iter().collect()
        }
        Background::EnergyShell { width } => {
            let mut images = BTreeSet::new();
            for k in 0..l {
                let t = translate(initial, k);
                let mut r = t.clone();
                r.reverse();
                images.extend(basis.index_of(&t));
                images.extend(basis.index_of(&r));
            }
            let e0 = diagonal_energy(initial, params);
            basis
                .iter()
                .enumerate()
                .filter(|&(k, n)| {
                    !images.contains(&k) && (diagonal_energy(n, params) - e0).abs() <= width
                })
                .map(|(k, _)| k)
                .collect()
        }
    }
}
