use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::window::GaussianWindow;
use crate::error::{invalid, Error, Result};
use crate::fock::{sector_dimension, LatticeParams};
use crate::meanfield::classical_hamiltonian;

/// Classical energy function used on the number shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellSymbol {
    /// Gross-Pitaevskii polynomial with `(U/2)|ψ|⁴`.
    MeanField,
    /// `(U/2)|ψ|²(|ψ|² − 1)`, the continuation of the Fock diagonal energy;
    /// matches the semiclassical covariance.
    FockDiagonal,
}

#[derive(Debug, Clone, Copy)]
pub struct DosEstimate {
    /// Shell average of `W(E − H(ψ))`.
    pub shell_average: f64,
    pub std_error: f64,
    /// `shell_average` times the sector dimension: states per unit energy.
    pub level_density: f64,
}

/// Monte Carlo average of `W(E − H(ψ))` over fields uniform on the sphere
/// `Σ|ψ_j|² = N`.
pub fn classical_dos(
    params: &LatticeParams,
    particles: usize,
    window: &GaussianWindow,
    n_mc: usize,
    seed: u64,
    symbol: ShellSymbol,
) -> Result<DosEstimate> {
    params.validate()?;
    if n_mc < 2 {
        return Err(invalid("need at least two Monte Carlo samples"));
    }
    if particles == 0 {
        return Err(invalid("number shell needs a positive particle number"));
    }
    let l = params.sites;
    let radius = (particles as f64).sqrt();
    const CHUNK: usize = 4096;
    let chunks = n_mc.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut psi = vec![Complex64::new(0.0, 0.0); l];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in (c * CHUNK)..((c + 1) * CHUNK).min(n_mc) {
                for z in psi.iter_mut() {
                    *z = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                }
                let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                psi.iter_mut().for_each(|z| *z *= radius / norm);
                let w = window.weight_at(shell_energy(&psi, params, symbol));
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = n_mc as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    if mean == 0.0 {
        return Err(Error::Empty("energy window has no support on the number shell".into()));
    }
    let dim = sector_dimension(l, particles).unwrap_or(u128::MAX) as f64;
    Ok(DosEstimate { shell_average: mean, std_error: (var / n).sqrt(), level_density: mean * dim })
}

pub fn shell_energy(psi: &[Complex64], params: &LatticeParams, symbol: ShellSymbol) -> f64 {
    let base = classical_hamiltonian(psi, params);
    match symbol {
        ShellSymbol::MeanField => base,
        ShellSymbol::FockDiagonal => {
            base - 0.5 * params.interaction * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
        }
    }
}
