use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::covariance::CovarianceMatrix;
use crate::error::{invalid, Error, Result};

/// `coeff · Π_a <n_a|ψ> · Π_b <ψ|m_b>` with indices into the covariance
/// state list.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub kets: Vec<usize>,
    pub bras: Vec<usize>,
}

impl Monomial {
    pub fn new(coeff: Complex64, kets: Vec<usize>, bras: Vec<usize>) -> Self {
        Self { coeff, kets, bras }
    }

    pub fn degree(&self) -> usize {
        self.kets.len() + self.bras.len()
    }

    fn check(&self, size: usize) -> Result<()> {
        if self.degree() > 4 {
            return Err(invalid(format!("monomial of degree {} exceeds 4", self.degree())));
        }
        if self.kets.iter().chain(&self.bras).any(|&i| i >= size) {
            return Err(invalid("monomial index outside the covariance state list"));
        }
        Ok(())
    }

    fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        let kets: Complex64 = self.kets.iter().map(|&i| z[i]).product();
        let bras: Complex64 = self.bras.iter().map(|&i| z[i].conj()).product();
        self.coeff * kets * bras
    }
}

/// Expectation over the circular complex Gaussian ensemble with
/// `E[<n|ψ><ψ|m>] = R_{n,m}` by Wick contraction. Monomials with unequal
/// numbers of kets and bras, including all odd ones, average to zero.
pub fn gaussian_average(functional: &[Monomial], cov: &CovarianceMatrix) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for mono in functional {
        mono.check(cov.size())?;
        if mono.kets.len() != mono.bras.len() {
            continue;
        }
        let r = |a: usize, b: usize| cov.get(mono.kets[a], mono.bras[b]);
        let contraction = match mono.kets.len() {
            0 => Complex64::new(1.0, 0.0),
            1 => r(0, 0),
            _ => r(0, 0) * r(1, 1) + r(0, 1) * r(1, 0),
        };
        total += mono.coeff * contraction;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
pub struct SampledAverage {
    pub mean: Complex64,
    /// Standard error of the real and imaginary parts combined.
    pub std_error: f64,
}

/// Monte Carlo estimate of [`gaussian_average`] by drawing `ψ = C w` with
/// `C C† = R` and `w` standard complex normal.
pub fn sample_gaussian_average(
    functional: &[Monomial],
    cov: &CovarianceMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<SampledAverage> {
    for mono in functional {
        mono.check(cov.size())?;
    }
    if n_samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let factor = square_root(cov)?;
    let n = cov.size();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let (mut sum, mut sum_sq) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..n_samples {
        for x in w.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *x = Complex64::new(re * s, im * s);
        }
        for (a, za) in z.iter_mut().enumerate() {
            *za = (0..n).map(|b| factor[a * n + b] * w[b]).sum();
        }
        let f: Complex64 = functional.iter().map(|m| m.evaluate(&z)).sum();
        sum += f;
        sum_sq += f.norm_sqr();
    }
    let count = n_samples as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean.norm_sqr()).max(0.0) * count / (count - 1.0);
    Ok(SampledAverage { mean, std_error: (var / count).sqrt() })
}

/// `C = V √Λ` from the eigendecomposition of the Hermitian covariance;
/// small negative eigenvalues from rounding are clipped.
fn square_root(cov: &CovarianceMatrix) -> Result<Vec<Complex64>> {
    let n = cov.size();
    let m = faer::Mat::<Complex64>::from_fn(n, n, |a, b| cov.get(a, b));
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let u = evd.U();
    let scale = (0..n).map(|k| evd.S()[k].re.abs()).fold(0.0, f64::max);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let lam = evd.S()[k].re;
        if lam < -1e-10 * scale.max(1e-300) {
            return Err(invalid("covariance is not positive semidefinite"));
        }
        let root = lam.max(0.0).sqrt();
        for a in 0..n {
            out[a * n + k] = u[(a, k)] * root;
        }
    }
    Ok(out)
}
