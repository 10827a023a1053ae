use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use crate::error::{invalid, Error, Result};

/// Minimum number of levels accepted by [`unfold`].
pub const MIN_LEVELS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnfoldMethod {
    /// Smooth staircase from Gaussian kernels whose width is this many local
    /// mean spacings.
    GaussianCounting { spacings: f64 },
    /// Least-squares polynomial fit of the staircase.
    Polynomial { degree: usize },
}

impl Default for UnfoldMethod {
    fn default() -> Self {
        UnfoldMethod::GaussianCounting { spacings: 8.0 }
    }
}

/// Levels mapped by the smooth counting function, so that the mean spacing
/// is one.
#[derive(Debug, Clone)]
pub struct UnfoldedSpectrum {
    pub raw: Vec<f64>,
    pub unfolded: Vec<f64>,
    pub method: UnfoldMethod,
    /// Fraction dropped at each edge.
    pub trim: f64,
    bulk_start: usize,
    bulk_end: usize,
}

impl UnfoldedSpectrum {
    /// Unfolded levels left after trimming the edges.
    pub fn bulk(&self) -> &[f64] {
        &self.unfolded[self.bulk_start..self.bulk_end]
    }

    /// Nearest-neighbour spacings within the bulk.
    pub fn spacings(&self) -> Vec<f64> {
        self.bulk().windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let b = self.bulk();
        (b[b.len() - 1] - b[0]) / (b.len() - 1) as f64
    }
}

pub fn unfold(eigs: &[f64], method: UnfoldMethod, trim: f64) -> Result<UnfoldedSpectrum> {
    if eigs.len() < MIN_LEVELS {
        return Err(invalid(format!("unfolding needs at least {MIN_LEVELS} levels, got {}", eigs.len())));
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(invalid("trim fraction must lie in [0, 0.5)"));
    }
    if eigs.iter().any(|e| !e.is_finite()) {
        return Err(invalid("non-finite eigenvalue"));
    }
    let mut raw = eigs.to_vec();
    raw.sort_by(f64::total_cmp);
    let unfolded = match method {
        UnfoldMethod::GaussianCounting { spacings } => {
            if !(spacings > 0.0) {
                return Err(invalid("kernel width must be positive"));
            }
            gaussian_counting(&raw, spacings)
        }
        UnfoldMethod::Polynomial { degree } => polynomial_counting(&raw, degree)?,
    };
    let n = raw.len();
    let cut = (trim * n as f64).round() as usize;
    Ok(UnfoldedSpectrum { raw, unfolded, method, trim, bulk_start: cut, bulk_end: n - cut })
}

fn gaussian_counting(levels: &[f64], spacings: f64) -> Vec<f64> {
    let n = levels.len();
    let half = (spacings.ceil() as usize).max(4).min(n / 2 - 1);
    // kernel width at each level from the local mean spacing
    let widths: Vec<f64> = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(half).min(n - 1 - 2 * half);
            let hi = lo + 2 * half;
            let local = (levels[hi] - levels[lo]) / (2 * half) as f64;
            let global = (levels[n - 1] - levels[0]) / (n - 1) as f64;
            spacings * if local > 0.0 { local } else { global.max(f64::MIN_POSITIVE) }
        })
        .collect();
    levels
        .iter()
        .map(|&e| {
            levels
                .iter()
                .zip(&widths)
                .map(|(&ei, &s)| 0.5 * libm::erfc(-(e - ei) / (s * std::f64::consts::SQRT_2)))
                .sum()
        })
        .collect()
}

fn polynomial_counting(levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = levels.len();
    if degree == 0 || degree >= n / 4 {
        return Err(invalid("polynomial degree must be between 1 and a quarter of the levels"));
    }
    let (lo, hi) = (levels[0], levels[n - 1]);
    let mid = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let scaled: Vec<f64> = levels.iter().map(|e| (e - mid) / half).collect();
    // Legendre-like conditioning via Chebyshev basis on [-1, 1]
    let basis = |x: f64| -> Vec<f64> {
        let mut t = vec![1.0, x];
        for k in 2..=degree {
            t.push(2.0 * x * t[k - 1] - t[k - 2]);
        }
        t.truncate(degree + 1);
        t
    };
    let a = Mat::<f64>::from_fn(n, degree + 1, |i, k| basis(scaled[i])[k]);
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| i as f64 + 0.5);
    a.qr().solve_lstsq_in_place(rhs.as_mut());
    let coeffs: Vec<f64> = (0..=degree).map(|k| rhs[(k, 0)]).collect();
    let out: Vec<f64> = scaled
        .iter()
        .map(|&x| basis(x).iter().zip(&coeffs).map(|(b, c)| b * c).sum())
        .collect();
    if out.iter().any(|v: &f64| !v.is_finite()) {
        return Err(Error::LinearAlgebra("polynomial unfolding produced non-finite values".into()));
    }
    Ok(out)
}
