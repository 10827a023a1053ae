use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{build_basis, FockBasis, LatticeParams, SparseHamiltonian, StateVector};

/// Amplitudes spread over several particle-number sectors.
#[derive(Debug, Clone, Default)]
pub struct MultiSectorState {
    sectors: BTreeMap<usize, StateVector>,
}

impl MultiSectorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(v: StateVector) -> Self {
        let mut s = Self::new();
        s.insert(v);
        s
    }

    pub fn insert(&mut self, v: StateVector) {
        self.sectors.insert(v.basis().particles(), v);
    }

    pub fn sector(&self, particles: usize) -> Option<&StateVector> {
        self.sectors.get(&particles)
    }

    pub fn sectors(&self) -> impl Iterator<Item = (usize, &StateVector)> {
        self.sectors.iter().map(|(&n, v)| (n, v))
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    /// Squared norm of each sector.
    pub fn weights(&self) -> BTreeMap<usize, f64> {
        self.sectors.iter().map(|(&n, v)| (n, v.norm_sqr())).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sectors.values().map(StateVector::norm_sqr).sum()
    }

    /// The normalized component with exactly `particles` bosons.
    pub fn projected(&self, particles: usize) -> Result<StateVector> {
        let v = self
            .sectors
            .get(&particles)
            .ok_or_else(|| invalid(format!("no sector with {particles} particles")))?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(invalid(format!("sector {particles} has zero weight")));
        }
        let mut p = v.clone();
        p.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(p)
    }
}

/// Sector Hamiltonians of one lattice, built on demand and shared.
#[derive(Debug, Clone)]
pub struct HamiltonianFamily {
    params: LatticeParams,
    sectors: BTreeMap<usize, Arc<SparseHamiltonian>>,
}

impl HamiltonianFamily {
    pub fn new(params: LatticeParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, sectors: BTreeMap::new() })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// Builds the Hamiltonian for every sector present in `state`.
    pub fn prepare(&mut self, state: &MultiSectorState) -> Result<()> {
        for (n, v) in state.sectors() {
            if v.basis().sites() != self.params.sites {
                return Err(Error::DimensionMismatch {
                    expected: self.params.sites,
                    found: v.basis().sites(),
                });
            }
            if !self.sectors.contains_key(&n) {
                let h = SparseHamiltonian::assemble(v.basis().clone(), &self.params)?;
                self.sectors.insert(n, Arc::new(h));
            }
        }
        Ok(())
    }

    pub fn sector(&self, particles: usize) -> Option<&Arc<SparseHamiltonian>> {
        self.sectors.get(&particles)
    }

    /// Fetches or builds a sector on a fresh basis.
    pub fn get_or_build(&mut self, particles: usize) -> Result<Arc<SparseHamiltonian>> {
        if let Some(h) = self.sectors.get(&particles) {
            return Ok(h.clone());
        }
        let basis = build_basis(self.params.sites, particles)?;
        let h = Arc::new(SparseHamiltonian::assemble(basis, &self.params)?);
        self.sectors.insert(particles, h.clone());
        Ok(h)
    }
}

/// Discarded weight above which a coherent state carries a warning.
pub const TRUNCATION_WARN: f64 = 1e-6;
/// Discarded weight above which construction fails.
pub const TRUNCATION_FAIL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationStatus {
    Ok,
    Warning,
}

#[derive(Debug, Clone)]
pub struct CoherentState {
    pub state: MultiSectorState,
    /// Total Poisson weight of the sectors left out.
    pub truncated_weight: f64,
    pub status: TruncationStatus,
}

/// Product of single-site coherent states `|b_1>⊗…⊗|b_L>`, kept on the
/// sectors `N̄ ± window·√N̄`.
pub fn coherent_state(amplitudes: &[Complex64], window: f64) -> Result<CoherentState> {
    let sites = amplitudes.len();
    if sites == 0 {
        return Err(invalid("coherent state needs at least one site"));
    }
    let mean: f64 = amplitudes.iter().map(|b| b.norm_sqr()).sum();
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid("coherent state needs a positive finite mean particle number"));
    }
    if !(window > 0.0) {
        return Err(invalid("sector window must be positive"));
    }
    let sigma = mean.sqrt();
    let lo = (mean - window * sigma).ceil().max(0.0) as usize;
    let hi = (mean + window * sigma).floor() as usize;
    let ln_fact = ln_factorials(hi.max(1));

    // Poisson weight of total number N: exp(-N̄) N̄^N / N!
    let poisson = |n: usize| (-mean + n as f64 * mean.ln() - ln_fact[n]).exp();
    let kept: f64 = (lo..=hi).map(poisson).sum();
    let truncated_weight = (1.0 - kept).max(0.0);
    if truncated_weight > TRUNCATION_FAIL {
        return Err(Error::Truncation { weight: truncated_weight });
    }
    if hi > u8::MAX as usize {
        return Err(invalid(format!("sector window reaches {hi} particles; at most 255 supported")));
    }

    let log_b: Vec<(f64, f64)> = amplitudes.iter().map(|b| (b.norm().ln(), b.arg())).collect();
    let mut state = MultiSectorState::new();
    for n in lo..=hi {
        let basis: Arc<FockBasis> = build_basis(sites, n)?;
        let amps = basis
            .iter()
            .map(|occ| {
                let mut log_mod = -0.5 * mean;
                let mut phase = 0.0;
                for (&k, &(lb, arg)) in occ.iter().zip(&log_b) {
                    if k == 0 {
                        continue;
                    }
                    if lb == f64::NEG_INFINITY {
                        return Complex64::new(0.0, 0.0);
                    }
                    log_mod += k as f64 * lb - 0.5 * ln_fact[k as usize];
                    phase += k as f64 * arg;
                }
                Complex64::from_polar(log_mod.exp(), phase)
            })
            .collect();
        state.insert(StateVector::new(basis, amps)?);
    }
    let status =
        if truncated_weight > TRUNCATION_WARN { TruncationStatus::Warning } else { TruncationStatus::Ok };
    Ok(CoherentState { state, truncated_weight, status })
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
