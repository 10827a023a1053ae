use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coherent::{HamiltonianFamily, MultiSectorState};
use super::krylov::Propagator;
use super::series::{check_grid, TimeSeries};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, SparseHamiltonian};

type OperatorBuilder = dyn Fn(&Arc<FockBasis>) -> Result<SparseHamiltonian> + Send + Sync;

/// An operator defined on every particle-number sector.
#[derive(Clone)]
pub enum SectorOperator {
    Occupation(usize),
    Custom(Arc<OperatorBuilder>),
}

impl SectorOperator {
    pub fn build(&self, basis: &Arc<FockBasis>) -> Result<SparseHamiltonian> {
        match self {
            SectorOperator::Occupation(site) => SparseHamiltonian::occupation(basis.clone(), *site),
            SectorOperator::Custom(f) => f(basis),
        }
    }
}

impl fmt::Debug for SectorOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorOperator::Occupation(s) => write!(f, "Occupation({s})"),
            SectorOperator::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `C(t) = ‖[W(t), V] Ψ‖²` with `W(t) = e^{iHt} W e^{-iHt}`, summed over
/// sectors. `V` and `W` must be diagonal in the Fock basis.
///
/// Forward states are stored on the grid; each time point then needs two
/// backward propagations, done in parallel.
pub fn otoc(
    family: &mut HamiltonianFamily,
    v_op: &SectorOperator,
    w_op: &SectorOperator,
    state: &MultiSectorState,
    times: &[f64],
    tol: f64,
) -> Result<TimeSeries<f64>> {
    check_grid(times)?;
    if times[0] < 0.0 {
        return Err(Error::TimeGrid("OTOC times must be non-negative".into()));
    }
    family.prepare(state)?;
    let mut total = vec![0.0; times.len()];
    for (n, psi) in state.sectors() {
        let h = family.sector(n).expect("prepared").clone();
        let basis = psi.basis().clone();
        let v = v_op.build(&basis)?;
        let w = w_op.build(&basis)?;
        if !v.is_diagonal() || !w.is_diagonal() {
            return Err(Error::NonDiagonal);
        }
        let vd = v.diagonal_values();
        let wd = w.diagonal_values();

        let dim = psi.len();
        let mut plain = psi.amplitudes().to_vec();
        let mut kicked: Vec<Complex64> = plain.iter().zip(&vd).map(|(a, x)| a * x).collect();
        let mut fwd_plain = Vec::with_capacity(times.len());
        let mut fwd_kicked = Vec::with_capacity(times.len());
        let mut prop = Propagator::new(&h);
        prop.for_each_time(&mut plain, 0.0, times, tol, |_, s| {
            fwd_plain.push(s.to_vec());
            Ok(())
        })?;
        prop.for_each_time(&mut kicked, 0.0, times, tol, |_, s| {
            fwd_kicked.push(s.to_vec());
            Ok(())
        })?;

        let values: Vec<f64> = (0..times.len())
            .into_par_iter()
            .map(|k| -> Result<f64> {
                let t = times[k];
                let mut a: Vec<Complex64> = fwd_kicked[k].iter().zip(&wd).map(|(x, w)| x * w).collect();
                let mut b: Vec<Complex64> = fwd_plain[k].iter().zip(&wd).map(|(x, w)| x * w).collect();
                let mut back = Propagator::new(&h);
                back.evolve(&mut a, -t, tol)?;
                back.evolve(&mut b, -t, tol)?;
                Ok((0..dim).map(|i| (a[i] - b[i] * vd[i]).norm_sqr()).sum())
            })
            .collect::<Result<_>>()?;
        for (acc, x) in total.iter_mut().zip(values) {
            *acc += x;
        }
    }
    TimeSeries::new(times.to_vec(), total)
}
