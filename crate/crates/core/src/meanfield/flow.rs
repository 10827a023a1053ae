use std::cell::Cell;

use faer::{Mat, Side};
use num_complex::Complex64;

use super::field::{
    check_field, classical_hamiltonian, gradient_variation, symplectic_term, velocity,
};
use super::integrate::{advance, Gauss6, B};
use crate::error::{invalid, Error, Result};
use crate::fock::LatticeParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Implicit three-stage Gauss-Legendre, order 6.
    GaussLegendre,
    /// Strang splitting of hopping and on-site parts, order 2. Field only.
    SplitStep,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub dt: f64,
    /// Record every this many steps.
    pub record_every: usize,
    /// Relative convergence target of the implicit stage iteration.
    pub stage_tol: f64,
    pub integrator: Integrator,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { dt: 0.01, record_every: 10, stage_tol: 1e-14, integrator: Integrator::GaussLegendre }
    }
}

impl FlowOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("time step must be positive"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Sampled mean-field trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<Complex64>>,
    /// Monodromy `∂(q,p)(t)/∂(q,p)(0)`, 2L×2L, when requested.
    pub tangents: Option<Vec<Mat<f64>>>,
    /// Accumulated `∫ (p·q̇ − H) dt`.
    pub actions: Vec<f64>,
}

impl Trajectory {
    pub fn final_field(&self) -> &[Complex64] {
        self.fields.last().expect("trajectory has samples")
    }

    pub fn energies(&self, params: &LatticeParams) -> Vec<f64> {
        self.fields.iter().map(|psi| classical_hamiltonian(psi, params)).collect()
    }

    pub fn numbers(&self) -> Vec<f64> {
        self.fields.iter().map(|psi| super::field::number(psi)).collect()
    }
}

/// Integrates the discrete Gross-Pitaevskii flow `i dψ/dt = ∂H/∂ψ*`.
pub fn gpe_flow(
    psi0: &[Complex64],
    params: &LatticeParams,
    duration: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    check_field(psi0, params)?;
    opts.validate()?;
    match opts.integrator {
        Integrator::GaussLegendre => run(psi0, params, duration, opts, false),
        Integrator::SplitStep => split_step(psi0, params, duration, opts),
    }
}

/// Flow plus the monodromy matrix in canonical coordinates `(q, p)`.
pub fn tangent_flow(
    psi0: &[Complex64],
    params: &LatticeParams,
    duration: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    check_field(psi0, params)?;
    opts.validate()?;
    if opts.integrator != Integrator::GaussLegendre {
        return Err(invalid("tangent flow requires the Gauss-Legendre integrator"));
    }
    run(psi0, params, duration, opts, true)
}

/// Total action of a trajectory.
pub fn action_integral(traj: &Trajectory) -> f64 {
    traj.actions.last().copied().unwrap_or(0.0)
}

/// Right-hand side for a field followed by `columns` tangent vectors.
pub(crate) fn augmented_rhs(
    params: &LatticeParams,
    columns: usize,
) -> impl FnMut(&[Complex64], &mut [Complex64]) + '_ {
    let l = params.sites;
    move |y: &[Complex64], dy: &mut [Complex64]| {
        let (psi, tangents) = y.split_at(l);
        let (dpsi, dtangents) = dy.split_at_mut(l);
        velocity(psi, params, dpsi);
        for c in 0..columns {
            let out = &mut dtangents[c * l..(c + 1) * l];
            gradient_variation(psi, &tangents[c * l..(c + 1) * l], params, out);
            out.iter_mut().for_each(|x| *x *= -I);
        }
    }
}

fn run(
    psi0: &[Complex64],
    params: &LatticeParams,
    duration: f64,
    opts: &FlowOptions,
    with_tangent: bool,
) -> Result<Trajectory> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid("flow duration must be finite and non-negative"));
    }
    let l = params.sites;
    let columns = if with_tangent { 2 * l } else { 0 };
    let mut y = vec![Complex64::new(0.0, 0.0); l * (1 + columns)];
    y[..l].copy_from_slice(psi0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for c in 0..columns {
        let unit = if c < l { Complex64::new(s, 0.0) } else { Complex64::new(0.0, s) };
        y[l + c * l + c % l] = unit;
    }

    let steps = ((duration / opts.dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { duration / steps as f64 };
    let mut rhs = augmented_rhs(params, columns);
    let mut stepper = Gauss6::new(y.len(), opts.stage_tol);

    let mut traj = Trajectory {
        times: vec![0.0],
        fields: vec![psi0.to_vec()],
        tangents: with_tangent.then(|| vec![monodromy(&y, l)]),
        actions: vec![0.0],
    };
    let action = Cell::new(0.0);
    let mut lagrangian = |st: &Gauss6, h: f64| {
        let mut sum = 0.0;
        for (i, w) in B.iter().enumerate() {
            let (stage, slope) = st.stage(i);
            let (psi, vel) = (&stage[..l], &slope[..l]);
            sum += w * (symplectic_term(psi, vel) - classical_hamiltonian(psi, params));
        }
        action.set(action.get() + h * sum);
    };
    for k in 1..=steps {
        let t0 = h * (k - 1) as f64;
        advance(&mut stepper, &mut y, t0, h, opts.dt, &mut rhs, &mut lagrangian)?;
        if k % opts.record_every == 0 || k == steps {
            let time = h * k as f64;
            let field = y[..l].to_vec();
            if field.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NoConvergence(format!("field diverged at t = {time}")));
            }
            traj.times.push(time);
            traj.fields.push(field);
            traj.actions.push(action.get());
            if let Some(m) = traj.tangents.as_mut() {
                m.push(monodromy(&y, l));
            }
        }
    }
    Ok(traj)
}

/// Reads the monodromy out of the tangent columns.
fn monodromy(y: &[Complex64], l: usize) -> Mat<f64> {
    let s = std::f64::consts::SQRT_2;
    Mat::from_fn(2 * l, 2 * l, |r, c| {
        let z = y[l + c * l + r % l];
        if r < l {
            s * z.re
        } else {
            s * z.im
        }
    })
}

/// Strang splitting: exact half-steps of the hopping matrix around an exact
/// on-site phase rotation.
fn split_step(
    psi0: &[Complex64],
    params: &LatticeParams,
    duration: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(invalid("flow duration must be finite and non-negative"));
    }
    let l = params.sites;
    let steps = ((duration / opts.dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { duration / steps as f64 };

    let hop = Complex64::from_polar(params.hopping, params.phase);
    let mut kinetic = Mat::<Complex64>::zeros(l, l);
    for (a, b) in params.bonds() {
        kinetic[(a, b)] -= hop;
        kinetic[(b, a)] -= hop.conj();
    }
    let evd = kinetic
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let u = evd.U();
    let half: Mat<Complex64> = Mat::from_fn(l, l, |r, c| {
        (0..l)
            .map(|k| u[(r, k)] * Complex64::from_polar(1.0, -evd.S()[k].re * 0.5 * h) * u[(c, k)].conj())
            .sum()
    });
    let apply_half = |psi: &mut Vec<Complex64>| {
        let out: Vec<Complex64> = (0..l).map(|r| (0..l).map(|c| half[(r, c)] * psi[c]).sum()).collect();
        *psi = out;
    };
    let lagrangian = |psi: &[Complex64]| {
        let mut vel = vec![Complex64::new(0.0, 0.0); l];
        velocity(psi, params, &mut vel);
        symplectic_term(psi, &vel) - classical_hamiltonian(psi, params)
    };

    let mut psi = psi0.to_vec();
    let mut traj =
        Trajectory { times: vec![0.0], fields: vec![psi.clone()], tangents: None, actions: vec![0.0] };
    let mut action = 0.0;
    let mut before = lagrangian(&psi);
    for k in 1..=steps {
        apply_half(&mut psi);
        for (z, &eps) in psi.iter_mut().zip(&params.onsite) {
            let rate = params.interaction * z.norm_sqr() + eps;
            *z *= Complex64::from_polar(1.0, -rate * h);
        }
        apply_half(&mut psi);
        let after = lagrangian(&psi);
        action += 0.5 * h * (before + after);
        before = after;
        if k % opts.record_every == 0 || k == steps {
            traj.times.push(h * k as f64);
            traj.fields.push(psi.clone());
            traj.actions.push(action);
        }
    }
    Ok(traj)
}
