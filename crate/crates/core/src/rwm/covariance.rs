use num_complex::Complex64;

use super::window::GaussianWindow;
use crate::error::{invalid, Error, Result};
use crate::fock::FockBasis;
use crate::quantum::Spectrum;

/// Minimum number of eigenstates within one window width before the exact
/// covariance carries a warning.
pub const MIN_WINDOW_STATES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Semiclassical,
}

/// Hermitian matrix `R_{n,m}(E)` over a list of Fock states.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub states: Vec<Vec<u8>>,
    /// Row-major, `states.len()²` entries.
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
    /// Eigenstates within one window width of the center (exact only).
    pub states_in_window: Option<usize>,
    pub warnings: Vec<String>,
}

impl CovarianceMatrix {
    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.size() + b]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.size()).map(|a| self.get(a, a)).sum()
    }

    /// Largest `|R_ab − conj(R_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }
}

/// `R_{n,m} = Σ_j W(E_j − E) <n|ψ_j><ψ_j|m> / Σ_j W(E_j − E)`.
pub fn exact_covariance(
    spectrum: &Spectrum,
    basis: &FockBasis,
    window: &GaussianWindow,
    states: &[Vec<u8>],
) -> Result<CovarianceMatrix> {
    if !spectrum.has_vectors() {
        return Err(invalid("exact covariance needs eigenvectors"));
    }
    if spectrum.dim() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: spectrum.dim() });
    }
    let rows: Vec<usize> = states
        .iter()
        .map(|n| basis.index_of(n).ok_or_else(|| invalid(format!("state {n:?} is not in the sector"))))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = spectrum.values().iter().map(|&e| window.weight_at(e)).collect();
    let total: f64 = weights.iter().sum();
    let peak = weights.iter().copied().fold(0.0, f64::max);
    if !(total > 0.0) {
        return Err(Error::Empty("no eigenstate carries window weight".into()));
    }
    let active: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 1e-17 * peak).collect();

    let n = rows.len();
    // amplitudes[a][k] = sqrt(w_j / ρ) <n_a|ψ_j> for active j
    let amps: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|&r| {
            active.iter().map(|&j| spectrum.component(r, j) * (weights[j] / total).sqrt()).collect()
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in a..n {
            let v: Complex64 = amps[a].iter().zip(&amps[b]).map(|(x, y)| x * y.conj()).sum();
            values[a * n + b] = v;
            values[b * n + a] = v.conj();
        }
        values[a * n + a].im = 0.0;
    }
    let count = spectrum.values().iter().filter(|&&e| window.contains(e)).count();
    let mut warnings = Vec::new();
    if count < MIN_WINDOW_STATES {
        warnings.push(format!(
            "only {count} eigenstates within one width of the window center (want {MIN_WINDOW_STATES})"
        ));
    }
    Ok(CovarianceMatrix {
        states: states.to_vec(),
        values,
        provenance: Provenance::Exact,
        states_in_window: Some(count),
        warnings,
    })
}

/// `R_{n,m}/√(R_{n,n} R_{m,m})`.
#[derive(Debug, Clone)]
pub struct NormalizedCorrelator {
    pub size: usize,
    pub values: Vec<Complex64>,
    /// Entries with modulus above `1 + 1e-10`; expected to be zero for
    /// exact provenance, possible for semiclassical input.
    pub exceeding: usize,
}

impl NormalizedCorrelator {
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.size + b]
    }

    /// Real parts of the strictly upper triangle, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.size;
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| self.get(a, b).re).collect()
    }
}

pub fn normalized_correlator(cov: &CovarianceMatrix) -> Result<NormalizedCorrelator> {
    let n = cov.size();
    let diag: Vec<f64> = (0..n).map(|a| cov.get(a, a).re).collect();
    if let Some(a) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(invalid(format!("diagonal entry {a} of the covariance is not positive")));
    }
    let mut values = Vec::with_capacity(n * n);
    let mut exceeding = 0;
    for a in 0..n {
        for b in 0..n {
            let v = if a == b { Complex64::new(1.0, 0.0) } else { cov.get(a, b) / (diag[a] * diag[b]).sqrt() };
            if v.norm() > 1.0 + 1e-10 {
                exceeding += 1;
            }
            values.push(v);
        }
    }
    Ok(NormalizedCorrelator { size: n, values, exceeding })
}

/// In-sector states whose occupations differ from `seed` by at most
/// `radius` on every site.
pub fn occupation_ball(basis: &FockBasis, seed: &[u8], radius: u8) -> Vec<Vec<u8>> {
    basis
        .iter()
        .filter(|n| n.iter().zip(seed).all(|(&a, &b)| a.abs_diff(b) <= radius))
        .map(|n| n.to_vec())
        .collect()
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
