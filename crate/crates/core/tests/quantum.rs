mod common;

use std::sync::Arc;

use common::{c, dense_hamiltonian, enumerate_states, max_abs_diff, Dense, DenseEvolution};
use fockchaos::fock::{build_basis, FockBasis, LatticeParams, SparseHamiltonian, StateVector};
use fockchaos::quantum::{
    autocorrelation, check_grid, coherent_state, diagonalize, diagonalize_with_caps, otoc,
    propagate, transition_probabilities, uniform_grid, DenseCaps, HamiltonianFamily, KrylovOptions,
    MultiSectorState, Propagator, SectorOperator, TruncationStatus,
};
use fockchaos::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..dim).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn states_of(basis: &Arc<FockBasis>) -> Vec<Vec<u8>> {
    basis.iter().map(|s| s.to_vec()).collect()
}

fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

#[test]
fn time_grids_must_be_uniform() {
    assert!(check_grid(&uniform_grid(0.0, 3.0, 31)).is_ok());
    assert!(matches!(check_grid(&[0.0, 1.0, 3.0]), Err(Error::TimeGrid(_))));
    assert!(check_grid(&[]).is_err());
    let g = uniform_grid(1.0, 2.0, 5);
    assert_eq!(g, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
}

#[test]
fn krylov_options_follow_the_dimension() {
    let small = KrylovOptions::for_dimension(100);
    assert!(small.full_reorthogonalization);
    let large = KrylovOptions::for_dimension(KrylovOptions::REORTHOGONALIZATION_LIMIT + 1);
    assert!(!large.full_reorthogonalization);
    assert!(large.max_dim < small.max_dim);
}

#[test]
fn plain_lanczos_agrees_with_reorthogonalized_propagation() {
    let params = LatticeParams::ring(5, 1.0, 0.4).with_phase(0.2);
    let basis = build_basis(5, 6).unwrap();
    let h = SparseHamiltonian::assemble(basis, &params).unwrap();
    let v0 = random_vector(h.dim(), 3);
    let run = |full: bool| {
        let mut v = v0.clone();
        let opts = KrylovOptions { max_dim: 30, full_reorthogonalization: full, ..KrylovOptions::default() };
        Propagator::with_options(&h, opts).evolve(&mut v, 7.5, 1e-10).unwrap();
        v
    };
    assert!(max_abs_diff(&run(true), &run(false)) < 1e-9);
}

#[test]
fn propagation_is_reversible() {
    let params = LatticeParams::open_chain(4, 1.0, 0.9).with_onsite(vec![0.1, -0.3, 0.2, 0.0]);
    let basis = build_basis(4, 5).unwrap();
    let h = SparseHamiltonian::assemble(basis.clone(), &params).unwrap();
    let v0 = StateVector::new(basis, random_vector(h.dim(), 9)).unwrap();
    let forward = propagate(&h, &v0, 12.0, 1e-11).unwrap();
    let back = propagate(&h, &forward, -12.0, 1e-11).unwrap();
    assert!((forward.norm() - 1.0).abs() < 1e-12);
    assert!(max_abs_diff(back.amplitudes(), v0.amplitudes()) < 1e-10);
}

#[test]
fn tolerance_outside_range_is_rejected() {
    let basis = build_basis(3, 2).unwrap();
    let h = SparseHamiltonian::assemble(basis.clone(), &LatticeParams::ring(3, 1.0, 0.1)).unwrap();
    let v = StateVector::fock(basis, &[2, 0, 0]).unwrap();
    assert!(propagate(&h, &v, 1.0, 1e-3).is_err());
    assert!(propagate(&h, &v, f64::INFINITY, 1e-8).is_err());
}

#[test]
fn transition_probabilities_sum_to_one() {
    let params = LatticeParams::ring(4, 1.0, 0.5);
    let basis = build_basis(4, 4).unwrap();
    let h = SparseHamiltonian::assemble(basis, &params).unwrap();
    let p = transition_probabilities(&h, &[1, 1, 1, 1], 3.3, 1e-10).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    assert!(p.iter().all(|&x| x >= 0.0));
}

#[test]
fn diagonalization_matches_reference() {
    let params = LatticeParams::ring(4, 0.8, 0.6).with_phase(0.4);
    let basis = build_basis(4, 4).unwrap();
    let h = SparseHamiltonian::assemble(basis.clone(), &params).unwrap();
    let spectrum = diagonalize(&h, true).unwrap();
    assert!(spectrum.max_residual(&h).unwrap() < 1e-11);
    let mut reference = DenseEvolution::new(&dense_hamiltonian(&params, &states_of(&basis))).energies;
    reference.sort_by(f64::total_cmp);
    let mut ours = spectrum.values().to_vec();
    ours.sort_by(f64::total_cmp);
    assert!(ours.iter().zip(&reference).all(|(a, b)| (a - b).abs() < 1e-11));
}

#[test]
fn dense_caps_are_enforced() {
    let basis = build_basis(4, 6).unwrap();
    let h = SparseHamiltonian::assemble(basis, &LatticeParams::ring(4, 1.0, 0.1)).unwrap();
    let caps = DenseCaps { values_only: 10, with_vectors: 10 };
    assert!(diagonalize_with_caps(&h, false, caps).unwrap_err().is_capacity());
}

#[test]
fn coherent_state_has_poisson_sectors_and_product_amplitudes() {
    let b = [c(1.2, 0.3), c(-0.4, 0.9), c(0.0, 0.0)];
    let cs = coherent_state(&b, 8.0).unwrap();
    assert_eq!(cs.status, TruncationStatus::Ok);
    let mean: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    for (n, w) in cs.state.weights() {
        let poisson = (-mean + n as f64 * mean.ln() - ln_factorial(n as u32)).exp();
        assert!((w - poisson).abs() < 1e-13, "sector {n}: {w} vs {poisson}");
    }
    let sector = cs.state.sector(3).unwrap();
    for (k, occ) in sector.basis().iter().enumerate() {
        let mut amp = c((-0.5 * mean).exp(), 0.0);
        for (&n, z) in occ.iter().zip(&b) {
            amp *= z.powu(n as u32) / (0.5 * ln_factorial(n as u32)).exp();
        }
        assert!((sector.amplitudes()[k] - amp).norm() < 1e-14);
    }
    assert!((cs.state.norm_sqr() + cs.truncated_weight - 1.0).abs() < 1e-12);
}

#[test]
fn narrow_sector_window_fails() {
    let b = [c(3.0, 0.0), c(3.0, 0.0)];
    assert!(matches!(coherent_state(&b, 0.5), Err(Error::Truncation { .. })));
}

#[test]
fn noninteracting_return_probability_is_a_coherent_overlap() {
    // For U = 0 a coherent state stays coherent with β(t) = e^{-iht} β and
    // |<β|β(t)>|² = exp(-|β(t) - β|²).
    let params = LatticeParams::ring(4, 1.0, 0.0).with_phase(0.3).with_onsite(vec![0.2, 0.0, -0.1, 0.0]);
    let b = vec![c(1.0, 0.2), c(0.3, -0.5), c(-0.7, 0.0), c(0.0, 0.4)];
    let cs = coherent_state(&b, 12.0).unwrap();
    let times = uniform_grid(0.0, 4.0, 17);
    let mut family = HamiltonianFamily::new(params.clone()).unwrap();
    let ac = autocorrelation(&mut family, &cs.state, &times, 1e-11).unwrap();

    let one = build_basis(4, 1).unwrap();
    let single = DenseEvolution::new(&dense_hamiltonian(&params, &states_of(&one)));
    let beta = nalgebra::DVector::from_vec(b.clone());
    for (t, p) in ac.probability.iter() {
        let bt = single.propagator(t) * &beta;
        let d: f64 = bt.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let want = (-d).exp();
        assert!((p - want).abs() < 1e-9, "t = {t}: {p} vs {want}");
    }
}

#[test]
fn otoc_of_a_fock_state_vanishes_initially_and_matches_reference() {
    let params = LatticeParams::ring(3, 1.0, 0.8);
    let basis = build_basis(3, 3).unwrap();
    let psi = StateVector::new(basis.clone(), random_vector(basis.len(), 4)).unwrap();
    let times = uniform_grid(0.0, 2.0, 9);
    let mut family = HamiltonianFamily::new(params.clone()).unwrap();
    let state = MultiSectorState::single(psi.clone());
    let ct = otoc(&mut family, &SectorOperator::Occupation(0), &SectorOperator::Occupation(2), &state, &times, 1e-11)
        .unwrap();
    assert!(ct.values()[0].abs() < 1e-20);

    let states = states_of(&basis);
    let evo = DenseEvolution::new(&dense_hamiltonian(&params, &states));
    let dim = states.len();
    let v = Dense::from_fn(dim, dim, |r, k| if r == k { c(states[r][0] as f64, 0.0) } else { c(0.0, 0.0) });
    let w = Dense::from_fn(dim, dim, |r, k| if r == k { c(states[r][2] as f64, 0.0) } else { c(0.0, 0.0) });
    let x = nalgebra::DVector::from_vec(psi.amplitudes().to_vec());
    for (t, value) in ct.iter() {
        let u = evo.propagator(t);
        let wt = u.adjoint() * &w * &u;
        let comm = &wt * &v - &v * &wt;
        let want = (comm * &x).norm_squared();
        assert!((value - want).abs() < 1e-8 * want.max(1.0), "t = {t}: {value} vs {want}");
    }
}

#[test]
fn otoc_rejects_off_diagonal_operators() {
    let params = LatticeParams::ring(3, 1.0, 0.8);
    let basis = build_basis(3, 2).unwrap();
    let state = MultiSectorState::single(StateVector::fock(basis, &[1, 1, 0]).unwrap());
    let hop = SectorOperator::Custom(Arc::new(|b: &Arc<FockBasis>| {
        SparseHamiltonian::assemble(b.clone(), &LatticeParams::ring(3, 1.0, 0.0))
    }));
    let mut family = HamiltonianFamily::new(params).unwrap();
    let r = otoc(&mut family, &hop, &SectorOperator::Occupation(0), &state, &uniform_grid(0.0, 1.0, 3), 1e-8);
    assert!(matches!(r, Err(Error::NonDiagonal)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn krylov_matches_dense_exponential(
        sites in 2usize..=4,
        particles in 1usize..=4,
        u in -1.0f64..1.5,
        phase in -3.0f64..3.0,
        t in -6.0f64..6.0,
        seed in 0u64..10_000,
    ) {
        let params = LatticeParams::ring(sites, 1.0, u).with_phase(phase);
        let basis = build_basis(sites, particles).unwrap();
        let h = SparseHamiltonian::assemble(basis.clone(), &params).unwrap();
        let v0 = random_vector(h.dim(), seed);
        let mut v = v0.clone();
        Propagator::new(&h).evolve(&mut v, t, 1e-11).unwrap();
        let reference = DenseEvolution::new(&dense_hamiltonian(&params, &states_of(&basis)));
        let want = reference.propagator(t) * nalgebra::DVector::from_vec(v0);
        prop_assert!(max_abs_diff(&v, want.as_slice()) < 1e-9);
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-11);
    }

    #[test]
    fn autocorrelation_of_an_eigenstate_is_one(sites in 2usize..=4, particles in 1usize..=3, pick in 0usize..1000) {
        let params = LatticeParams::ring(sites, 1.0, 0.37);
        let basis = build_basis(sites, particles).unwrap();
        let h = SparseHamiltonian::assemble(basis.clone(), &params).unwrap();
        let spectrum = diagonalize(&h, true).unwrap();
        let j = pick % h.dim();
        let psi = StateVector::new(basis, spectrum.vector(j).unwrap().to_vec()).unwrap();
        let mut family = HamiltonianFamily::new(params).unwrap();
        let ac = autocorrelation(&mut family, &MultiSectorState::single(psi), &uniform_grid(0.0, 5.0, 11), 1e-11).unwrap();
        for (t, a) in ac.amplitude.iter() {
            let want = Complex64::from_polar(1.0, -spectrum.values()[j] * t);
            prop_assert!((a - want).norm() < 1e-9);
        }
    }

    #[test]
    fn enumerated_and_ranked_counts_agree(sites in 2usize..=5, particles in 0usize..=5) {
        prop_assert_eq!(enumerate_states(sites, particles).len(), build_basis(sites, particles).unwrap().len());
    }
}
