use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Gaussian energy window of standard deviation `width` around `center`,
/// `W(x) = exp(−x²/2η²)/(√(2π) η)` with Fourier transform
/// `W̃(τ) = exp(−η²τ²/2)`, so that `W(x) = ∫ dτ/2π W̃(τ) e^{iτx}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWindow {
    pub center: f64,
    pub width: f64,
}

impl GaussianWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(invalid("window needs a finite center and a positive width"));
        }
        Ok(Self { center, width })
    }

    /// `W(x)` for an offset `x` from the center.
    pub fn weight(&self, x: f64) -> f64 {
        let s = x / self.width;
        (-0.5 * s * s).exp() / ((2.0 * PI).sqrt() * self.width)
    }

    /// `W(E − center)`.
    pub fn weight_at(&self, energy: f64) -> f64 {
        self.weight(energy - self.center)
    }

    pub fn transform(&self, tau: f64) -> f64 {
        let s = self.width * tau;
        (-0.5 * s * s).exp()
    }

    /// Largest `|τ|` with `W̃(τ) ≥ cutoff`.
    pub fn support(&self, cutoff: f64) -> f64 {
        (-2.0 * cutoff.ln()).sqrt() / self.width
    }

    /// True if `energy` lies within one width of the center.
    pub fn contains(&self, energy: f64) -> bool {
        (energy - self.center).abs() <= self.width
    }
}
