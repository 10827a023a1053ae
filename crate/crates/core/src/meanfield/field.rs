use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fock::LatticeParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mean-field configuration `ψ_j = (q_j + i p_j)/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalField(pub Vec<Complex64>);

impl ClassicalField {
    pub fn new(psi: Vec<Complex64>) -> Result<Self> {
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("field has non-finite entries"));
        }
        Ok(Self(psi))
    }

    pub fn from_qp(q: &[f64], p: &[f64]) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self(q.iter().zip(p).map(|(&q, &p)| Complex64::new(q * s, p * s)).collect())
    }

    /// Canonical coordinates `(q, p)`.
    pub fn to_qp(&self) -> (Vec<f64>, Vec<f64>) {
        let s = std::f64::consts::SQRT_2;
        (self.0.iter().map(|z| z.re * s).collect(), self.0.iter().map(|z| z.im * s).collect())
    }

    pub fn sites(&self) -> usize {
        self.0.len()
    }

    /// Particle number `Σ|ψ_j|²`.
    pub fn number(&self) -> f64 {
        number(&self.0)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

pub fn number(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

/// `H = -J Σ (e^{iφ} ψ*_a ψ_b + c.c.) + (U/2) Σ |ψ|⁴ + Σ ε |ψ|²`.
pub fn classical_hamiltonian(psi: &[Complex64], params: &LatticeParams) -> f64 {
    let hop = Complex64::from_polar(params.hopping, params.phase);
    let kinetic: f64 =
        params.bonds().iter().map(|&(a, b)| -2.0 * (hop * psi[a].conj() * psi[b]).re).sum();
    let local: f64 = psi
        .iter()
        .zip(&params.onsite)
        .map(|(z, &eps)| {
            let n = z.norm_sqr();
            0.5 * params.interaction * n * n + eps * n
        })
        .sum();
    kinetic + local
}

/// `g_j = ∂H/∂ψ*_j`.
pub fn gradient(psi: &[Complex64], params: &LatticeParams, g: &mut [Complex64]) {
    let hop = Complex64::from_polar(params.hopping, params.phase);
    for ((gj, z), &eps) in g.iter_mut().zip(psi).zip(&params.onsite) {
        *gj = z * (params.interaction * z.norm_sqr() + eps);
    }
    for (a, b) in params.bonds() {
        g[a] -= hop * psi[b];
        g[b] -= hop.conj() * psi[a];
    }
}

/// Variation of the gradient, `δg = A δψ + B δψ*` with
/// `A = h + diag(ε + 2U|ψ|²)` and `B = diag(U ψ²)`.
pub fn gradient_variation(
    psi: &[Complex64],
    dpsi: &[Complex64],
    params: &LatticeParams,
    out: &mut [Complex64],
) {
    let hop = Complex64::from_polar(params.hopping, params.phase);
    let u = params.interaction;
    for (((o, z), d), &eps) in out.iter_mut().zip(psi).zip(dpsi).zip(&params.onsite) {
        *o = d * (eps + 2.0 * u * z.norm_sqr()) + u * z * z * d.conj();
    }
    for (a, b) in params.bonds() {
        out[a] -= hop * dpsi[b];
        out[b] -= hop.conj() * dpsi[a];
    }
}

/// Mean-field velocity `dψ/dt = -i ∂H/∂ψ*`.
pub fn velocity(psi: &[Complex64], params: &LatticeParams, out: &mut [Complex64]) {
    gradient(psi, params, out);
    out.iter_mut().for_each(|x| *x *= -I);
}

/// `Σ p_j q̇_j` for a field and its velocity.
pub(crate) fn symplectic_term(psi: &[Complex64], vel: &[Complex64]) -> f64 {
    psi.iter().zip(vel).map(|(z, v)| 2.0 * z.im * v.re).sum()
}

/// 2L×2L real matrix of a complex-linear-plus-antilinear map `Aδψ + Bδψ*`,
/// in coordinates `(Re δψ, Im δψ)`.
pub(crate) fn realify(a: &[Vec<Complex64>], b_diag: &[Complex64]) -> Vec<Vec<f64>> {
    let l = a.len();
    let mut m = vec![vec![0.0; 2 * l]; 2 * l];
    for r in 0..l {
        for c in 0..l {
            let (ar, ai) = (a[r][c].re, a[r][c].im);
            let (br, bi) = if r == c { (b_diag[r].re, b_diag[r].im) } else { (0.0, 0.0) };
            m[r][c] = ar + br;
            m[r][l + c] = -ai + bi;
            m[l + r][c] = ai + bi;
            m[l + r][l + c] = ar - br;
        }
    }
    m
}

/// Dense `A` of [`gradient_variation`] (the `B` part is diagonal).
pub(crate) fn variation_blocks(
    psi: &[Complex64],
    params: &LatticeParams,
) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let l = psi.len();
    let hop = Complex64::from_polar(params.hopping, params.phase);
    let u = params.interaction;
    let mut a = vec![vec![Complex64::new(0.0, 0.0); l]; l];
    for j in 0..l {
        a[j][j] = Complex64::new(params.onsite[j] + 2.0 * u * psi[j].norm_sqr(), 0.0);
    }
    for (x, y) in params.bonds() {
        a[x][y] -= hop;
        a[y][x] -= hop.conj();
    }
    let b = psi.iter().map(|z| u * z * z).collect();
    (a, b)
}

pub(crate) fn check_field(psi: &[Complex64], params: &LatticeParams) -> Result<()> {
    params.validate()?;
    if psi.len() != params.sites {
        return Err(crate::Error::DimensionMismatch { expected: params.sites, found: psi.len() });
    }
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("field has non-finite entries"));
    }
    Ok(())
}
