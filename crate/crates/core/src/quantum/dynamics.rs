use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coherent::{HamiltonianFamily, MultiSectorState};
use super::krylov::{dot, Propagator};
use super::series::{check_grid, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::fock::{SparseHamiltonian, StateVector};

/// Return amplitude `A(t) = <Ψ|e^{-iHt}|Ψ>` and probability `C(t) = |A|²`.
#[derive(Debug, Clone)]
pub struct Autocorrelation {
    pub amplitude: TimeSeries<Complex64>,
    pub probability: TimeSeries<f64>,
}

/// Sectors are propagated independently and in parallel.
pub fn autocorrelation(
    family: &mut HamiltonianFamily,
    state: &MultiSectorState,
    times: &[f64],
    tol: f64,
) -> Result<Autocorrelation> {
    check_grid(times)?;
    family.prepare(state)?;
    let family = &*family;
    let sectors: Vec<(usize, &StateVector)> = state.sectors().collect();
    let partial: Vec<Vec<Complex64>> = sectors
        .par_iter()
        .map(|&(n, v)| -> Result<Vec<Complex64>> {
            let h = family.sector(n).expect("prepared above");
            let mut psi = v.amplitudes().to_vec();
            let mut out = Vec::with_capacity(times.len());
            Propagator::new(h).for_each_time(&mut psi, 0.0, times, tol, |_, now| {
                out.push(dot(v.amplitudes(), now));
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut amp = vec![Complex64::new(0.0, 0.0); times.len()];
    for part in &partial {
        for (a, p) in amp.iter_mut().zip(part) {
            *a += p;
        }
    }
    let prob = amp.iter().map(|a| a.norm_sqr()).collect();
    Ok(Autocorrelation {
        amplitude: TimeSeries::new(times.to_vec(), amp)?,
        probability: TimeSeries::new(times.to_vec(), prob)?,
    })
}

/// Gaussian-damped Fourier transform of a return amplitude,
/// `SP(E) = (1/2π) ∫ dt e^{iEt} A(t) e^{-(ηt)²/2}` over the whole real line,
/// using `A(-t) = conj A(t)`. An eigenstate contributes a unit-area Gaussian
/// of standard deviation `η` at its energy.
pub fn weighted_spectrum(
    amplitude: &TimeSeries<Complex64>,
    damping: f64,
    energies: &[f64],
) -> Result<Vec<f64>> {
    if !(damping > 0.0) {
        return Err(invalid("spectral damping must be positive"));
    }
    let times = amplitude.times();
    if times.len() < 2 {
        return Err(Error::TimeGrid("need at least two samples".into()));
    }
    if times[0].abs() > 1e-12 {
        return Err(Error::TimeGrid("spectrum needs a grid starting at t = 0".into()));
    }
    let dt = amplitude.step();
    let weighted: Vec<Complex64> = amplitude
        .iter()
        .enumerate()
        .map(|(k, (t, a))| {
            let w = if k == 0 || k == times.len() - 1 { 0.5 } else { 1.0 };
            a * (w * dt * (-0.5 * (damping * t).powi(2)).exp())
        })
        .collect();
    Ok(energies
        .iter()
        .map(|&e| {
            let s: f64 = times
                .iter()
                .zip(&weighted)
                .map(|(&t, w)| (Complex64::from_polar(1.0, e * t) * w).re)
                .sum();
            s / PI
        })
        .collect())
}

/// `|<n_f| e^{-iHt} |n_i>|²`.
pub fn transition_probability(
    h: &SparseHamiltonian,
    initial: &[u8],
    target: &[u8],
    t: f64,
    tol: f64,
) -> Result<f64> {
    let f = h
        .basis()
        .index_of(target)
        .ok_or_else(|| invalid(format!("final state {target:?} is not in the sector")))?;
    let probs = transition_probabilities(h, initial, t, tol)?;
    Ok(probs[f])
}

/// `|<n|e^{-iHt}|n_i>|²` for every basis state `n`.
pub fn transition_probabilities(
    h: &SparseHamiltonian,
    initial: &[u8],
    t: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut v = StateVector::fock(h.basis().clone(), initial)?;
    Propagator::new(h).evolve(v.amplitudes_mut(), t, tol)?;
    Ok(v.probabilities())
}
