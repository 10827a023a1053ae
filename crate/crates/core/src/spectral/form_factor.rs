use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::unfold::UnfoldedSpectrum;
use crate::error::{invalid, Result};

/// Minimum ensemble size for a form-factor estimate.
pub const MIN_REALIZATIONS: usize = 10;

/// Fewest sub-samples per smoothing window.
const MIN_SMOOTHING_POINTS: usize = 25;

/// `K(τ) = ⟨|Σ_j e^{2πi x_j τ}|²⟩ / N` over the bulk of each unfolded
/// spectrum, averaged over the ensemble and over a τ-window of the given
/// full width centered on each grid point.
pub fn form_factor(spectra: &[UnfoldedSpectrum], taus: &[f64], smoothing: f64) -> Result<Vec<f64>> {
    if spectra.len() < MIN_REALIZATIONS {
        return Err(invalid(format!(
            "form factor needs at least {MIN_REALIZATIONS} spectra, got {}",
            spectra.len()
        )));
    }
    if taus.iter().any(|&t| !(t > 0.0 && t <= 4.0)) {
        return Err(invalid("form factor times must lie in (0, 4]"));
    }
    if !(smoothing >= 0.0) {
        return Err(invalid("smoothing width must be non-negative"));
    }
    let per = |x: &[f64], tau: f64| -> f64 {
        let s: Complex64 = x.iter().map(|&v| Complex64::from_polar(1.0, 2.0 * PI * v * tau)).sum();
        s.norm_sqr() / x.len() as f64
    };
    Ok(taus
        .par_iter()
        .map(|&tau| {
            let mut acc = 0.0;
            let mut count = 0usize;
            for spec in spectra {
                let bulk = spec.bulk();
                // resolve every independent frequency bin of width 1/N
                let points = if smoothing == 0.0 {
                    1
                } else {
                    ((2.0 * smoothing * bulk.len() as f64).ceil() as usize).max(MIN_SMOOTHING_POINTS)
                };
                for k in 0..points {
                    let t = tau + smoothing * ((k as f64 + 0.5) / points as f64 - 0.5);
                    if t > 0.0 {
                        acc += per(bulk, t);
                        count += 1;
                    }
                }
            }
            acc / count as f64
        })
        .collect())
}

/// GOE form factor: `2τ − τ ln(1+2τ)` below `τ = 1`,
/// `2 − τ ln((2τ+1)/(2τ−1))` above.
pub fn goe_form_factor(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("form factor needs τ > 0"));
    }
    Ok(if tau <= 1.0 {
        2.0 * tau - tau * (2.0 * tau).ln_1p()
    } else {
        2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    /// Time-reversal invariant, ramp slope 2.
    Orthogonal,
    /// Broken time reversal, ramp slope 1.
    Unitary,
}

impl SymmetryClass {
    pub fn ramp_slope(self) -> f64 {
        match self {
            SymmetryClass::Orthogonal => 2.0,
            SymmetryClass::Unitary => 1.0,
        }
    }

    pub fn from_beta(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(SymmetryClass::Orthogonal),
            2 => Ok(SymmetryClass::Unitary),
            _ => Err(invalid(format!("unsupported symmetry class β = {beta}"))),
        }
    }
}

/// Diagonal-approximation ramp `η τ`.
pub fn diagonal_ramp(tau: f64, class: SymmetryClass) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("ramp needs τ > 0"));
    }
    Ok(class.ramp_slope() * tau)
}

/// Least-squares slope through the origin of `K(τ)` over `τ ∈ [lo, hi]`.
pub fn ramp_slope(taus: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&t, &k) in taus.iter().zip(values) {
        if t >= lo && t <= hi {
            num += t * k;
            den += t * t;
        }
    }
    if den == 0.0 {
        return Err(invalid("no samples inside the ramp fit range"));
    }
    Ok(num / den)
}
