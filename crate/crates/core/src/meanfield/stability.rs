use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::field::{
    check_field, classical_hamiltonian, gradient, number, realify, variation_blocks,
};
use super::flow::{augmented_rhs, FlowOptions};
use super::integrate::{advance, Gauss6};
use crate::error::{invalid, Error, Result};
use crate::fock::LatticeParams;

#[derive(Debug, Clone, Copy)]
pub struct LyapunovOptions {
    /// Time between tangent renormalizations.
    pub renorm_interval: f64,
    pub blocks: usize,
    /// Relative drift between early and late blocks that marks the estimate
    /// as unconverged.
    pub drift_limit: f64,
    /// Exponents below this are treated as zero for the drift check.
    pub floor: f64,
    pub seed: u64,
    pub flow: FlowOptions,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            renorm_interval: 0.5,
            blocks: 10,
            drift_limit: 0.2,
            floor: 1e-3,
            seed: 0,
            flow: FlowOptions { dt: 0.02, ..FlowOptions::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    /// Standard error of the block means.
    pub error: f64,
    /// Exponent of each block after the discarded transient block.
    pub block_exponents: Vec<f64>,
    pub converged: bool,
}

/// Largest Lyapunov exponent by repeated renormalization of one tangent
/// vector. The first block is a transient and is discarded; the estimate is
/// the mean of the remaining block exponents.
pub fn lyapunov(
    psi0: &[Complex64],
    params: &LatticeParams,
    duration: f64,
    opts: &LyapunovOptions,
) -> Result<LyapunovEstimate> {
    check_field(psi0, params)?;
    if !(opts.renorm_interval > 0.0) || opts.blocks < 3 {
        return Err(invalid("need a positive renormalization interval and at least 3 blocks"));
    }
    let intervals = (duration / opts.renorm_interval).round() as usize;
    let per_block = intervals / opts.blocks;
    if per_block == 0 {
        return Err(invalid("duration too short for the requested blocks"));
    }
    let l = params.sites;
    let mut y = vec![Complex64::new(0.0, 0.0); 2 * l];
    y[..l].copy_from_slice(psi0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for z in &mut y[l..] {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z = Complex64::new(re, im);
    }
    normalize(&mut y[l..]);

    let mut rhs = augmented_rhs(params, 1);
    let mut stepper = Gauss6::new(y.len(), opts.flow.stage_tol);
    let mut blocks = Vec::with_capacity(opts.blocks);
    let mut time = 0.0;
    for _ in 0..opts.blocks {
        let mut growth = 0.0;
        for _ in 0..per_block {
            advance(&mut stepper, &mut y, time, opts.renorm_interval, opts.flow.dt, &mut rhs, &mut |_, _| {})?;
            time += opts.renorm_interval;
            let norm = normalize(&mut y[l..]);
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NoConvergence(format!("tangent vector degenerated at t = {time}")));
            }
            growth += norm.ln();
        }
        blocks.push(growth / (per_block as f64 * opts.renorm_interval));
    }
    let kept = blocks.split_off(1);
    let n = kept.len() as f64;
    let exponent = kept.iter().sum::<f64>() / n;
    let var = kept.iter().map(|x| (x - exponent).powi(2)).sum::<f64>() / (n - 1.0);
    let half = kept.len() / 2;
    let early = kept[..half].iter().sum::<f64>() / half as f64;
    let late = kept[half..].iter().sum::<f64>() / (kept.len() - half) as f64;
    let drifting = exponent > opts.floor && (early - late).abs() > opts.drift_limit * exponent;
    Ok(LyapunovEstimate { exponent, error: (var / n).sqrt(), block_exponents: kept, converged: !drifting })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// Relative equilibrium `ψ(t) = e^{-iμt} ψ*`.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub field: Vec<Complex64>,
    pub chemical_potential: f64,
    pub energy: f64,
    /// `‖∂H/∂ψ* − μψ‖`.
    pub residual: f64,
    /// Eigenvalues of the flow linearized in the co-rotating frame, sorted
    /// by decreasing real part.
    pub exponents: Vec<Complex64>,
}

impl FixedPoint {
    /// Largest real part among the stability exponents.
    pub fn max_growth_rate(&self) -> f64 {
        self.exponents.first().map_or(0.0, |z| z.re)
    }

    pub fn is_hyperbolic(&self, threshold: f64) -> bool {
        self.max_growth_rate() > threshold
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100 }
    }
}

/// Solves `∂H/∂ψ* = μψ` at the particle number of `seed` by damped
/// Gauss-Newton, with the global phase fixed at the largest seed component.
pub fn find_fixed_point(
    seed: &[Complex64],
    params: &LatticeParams,
    opts: &NewtonOptions,
) -> Result<FixedPoint> {
    check_field(seed, params)?;
    let l = params.sites;
    let target = number(seed);
    if !(target > 0.0) {
        return Err(invalid("fixed-point seed must have a positive particle number"));
    }
    let anchor = (0..l)
        .max_by(|&a, &b| seed[a].norm().total_cmp(&seed[b].norm()))
        .expect("at least one site");
    let gauge = Complex64::from_polar(1.0, -seed[anchor].arg());
    let mut psi: Vec<Complex64> = seed.iter().map(|z| z * gauge).collect();
    let mut g = vec![Complex64::new(0.0, 0.0); l];
    gradient(&psi, params, &mut g);
    let mut mu = psi.iter().zip(&g).map(|(z, gz)| (z.conj() * gz).re).sum::<f64>() / target;

    let residual_vec = |psi: &[Complex64], mu: f64| -> Vec<f64> {
        let mut g = vec![Complex64::new(0.0, 0.0); l];
        gradient(psi, params, &mut g);
        let mut r = Vec::with_capacity(2 * l + 2);
        r.extend(g.iter().zip(psi).map(|(gz, z)| (gz - z * mu).re));
        r.extend(g.iter().zip(psi).map(|(gz, z)| (gz - z * mu).im));
        r.push(number(psi) - target);
        r.push(psi[anchor].im);
        r
    };
    let norm2 = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut r = residual_vec(&psi, mu);
    let mut iter = 0;
    while norm2(&r) > opts.tol * (1.0 + target) {
        iter += 1;
        if iter > opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "fixed-point search stalled at residual {:e}",
                norm2(&r)
            )));
        }
        let jac = jacobian(&psi, mu, params, anchor);
        let pinv = jac.thin_svd().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?.pseudoinverse();
        let step: Vec<f64> = (0..2 * l + 1)
            .map(|i| -(0..r.len()).map(|k| pinv[(i, k)] * r[k]).sum::<f64>())
            .collect();
        let mut damping = 1.0;
        loop {
            let trial: Vec<Complex64> = (0..l)
                .map(|j| psi[j] + Complex64::new(step[j], step[l + j]) * damping)
                .collect();
            let trial_mu = mu + damping * step[2 * l];
            let tr = residual_vec(&trial, trial_mu);
            if norm2(&tr) < norm2(&r) || damping < 1e-6 {
                if !(norm2(&tr) < norm2(&r)) {
                    return Err(Error::NoConvergence(format!(
                        "Newton line search failed at residual {:e}",
                        norm2(&r)
                    )));
                }
                psi = trial;
                mu = trial_mu;
                r = tr;
                break;
            }
            damping *= 0.5;
        }
    }
    gradient(&psi, params, &mut g);
    let residual = g.iter().zip(&psi).map(|(gz, z)| (gz - z * mu).norm_sqr()).sum::<f64>().sqrt();
    let exponents = stability_exponents(&psi, mu, params)?;
    Ok(FixedPoint {
        energy: classical_hamiltonian(&psi, params),
        field: psi,
        chemical_potential: mu,
        residual,
        exponents,
    })
}

fn jacobian(psi: &[Complex64], mu: f64, params: &LatticeParams, anchor: usize) -> Mat<f64> {
    let l = psi.len();
    let (mut a, b) = variation_blocks(psi, params);
    for (j, row) in a.iter_mut().enumerate() {
        row[j] -= mu;
    }
    let m = realify(&a, &b);
    Mat::from_fn(2 * l + 2, 2 * l + 1, |r, c| match (r, c) {
        (r, c) if r < 2 * l && c < 2 * l => m[r][c],
        (r, c) if r < l && c == 2 * l => -psi[r].re,
        (r, c) if r < 2 * l && c == 2 * l => -psi[r - l].im,
        (r, c) if r == 2 * l && c < l => 2.0 * psi[c].re,
        (r, c) if r == 2 * l && c < 2 * l => 2.0 * psi[c - l].im,
        (r, c) if r == 2 * l + 1 => f64::from(c == l + anchor),
        _ => 0.0,
    })
}

/// Eigenvalues of the linearized co-rotating flow
/// `δψ̇ = -i[(A − μ)δψ + Bδψ*]`, sorted by decreasing real part.
pub fn stability_exponents(
    psi: &[Complex64],
    mu: f64,
    params: &LatticeParams,
) -> Result<Vec<Complex64>> {
    let l = psi.len();
    let (mut a, b) = variation_blocks(psi, params);
    for (j, row) in a.iter_mut().enumerate() {
        row[j] -= mu;
    }
    // (Re, Im) of the variation, then multiply by -i:
    // d(Re δψ)/dt = Im(δg), d(Im δψ)/dt = -Re(δg)
    let m = realify(&a, &b);
    let flow = Mat::<f64>::from_fn(2 * l, 2 * l, |r, c| if r < l { m[l + r][c] } else { -m[r - l][c] });
    let mut eig = flow.eigenvalues().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    eig.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(eig)
}
