mod common;

use common::c;
use fockchaos::fock::LatticeParams;
use fockchaos::meanfield::{
    classical_hamiltonian, find_fixed_point, gpe_flow, gradient, lyapunov, number, stability_exponents,
    velocity, FlowOptions, Integrator, LyapunovOptions, NewtonOptions,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3..=5)
        .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
}

#[test]
fn gradient_matches_finite_differences() {
    let params = LatticeParams::ring(4, 0.7, 0.3).with_phase(0.4).with_onsite(vec![0.1, 0.0, -0.2, 0.3]);
    let psi = vec![c(1.0, 0.5), c(-0.3, 0.8), c(0.2, -1.1), c(0.6, 0.0)];
    let mut g = vec![c(0.0, 0.0); 4];
    gradient(&psi, &params, &mut g);
    let h = 1e-6;
    for j in 0..4 {
        let shifted = |dz: Complex64| {
            let mut p = psi.clone();
            p[j] += dz;
            classical_hamiltonian(&p, &params)
        };
        // ∂H/∂ψ* = (∂H/∂x + i ∂H/∂y) / 2
        let dx = (shifted(c(h, 0.0)) - shifted(c(-h, 0.0))) / (2.0 * h);
        let dy = (shifted(c(0.0, h)) - shifted(c(0.0, -h))) / (2.0 * h);
        assert!((g[j] - c(dx, dy) * 0.5).norm() < 1e-7, "site {j}: {} vs {}", g[j], c(dx, dy) * 0.5);
    }
}

#[test]
fn linear_flow_is_a_matrix_exponential() {
    let params = LatticeParams::ring(3, 1.0, 0.0).with_phase(0.7);
    let psi0 = vec![c(1.0, 0.0), c(0.0, 0.5), c(-0.2, 0.1)];
    let traj = gpe_flow(&psi0, &params, 2.0, &FlowOptions::with_dt(0.005)).unwrap();
    let basis = fockchaos::fock::build_basis(3, 1).unwrap();
    let states: Vec<Vec<u8>> = basis.iter().map(|s| s.to_vec()).collect();
    let evo = common::DenseEvolution::new(&common::dense_hamiltonian(&params, &states));
    let want = evo.propagator(2.0) * nalgebra::DVector::from_vec(psi0);
    assert!(common::max_abs_diff(traj.final_field(), want.as_slice()) < 1e-10);
}

#[test]
fn split_step_agrees_with_gauss_legendre() {
    let params = LatticeParams::ring(4, 1.0, 0.25);
    let psi0 = vec![c(1.5, 0.0), c(0.2, 0.4), c(-1.0, 0.3), c(0.0, -0.6)];
    let a = gpe_flow(&psi0, &params, 3.0, &FlowOptions::with_dt(0.001)).unwrap();
    let opts = FlowOptions { integrator: Integrator::SplitStep, ..FlowOptions::with_dt(0.001) };
    let b = gpe_flow(&psi0, &params, 3.0, &opts).unwrap();
    assert!(common::max_abs_diff(a.final_field(), b.final_field()) < 1e-5);
}

#[test]
fn fixed_point_of_the_staggered_seed() {
    let params = LatticeParams::ring(4, 1.0, 4.0 / (std::f64::consts::PI * 40.0));
    let a = 20f64.sqrt();
    let seed = vec![c(0.0, 0.0), c(a, 0.0), c(0.0, 0.0), c(-a, 0.0)];
    let fp = find_fixed_point(&seed, &params, &NewtonOptions::default()).unwrap();
    assert!(fp.residual < 1e-10);
    assert!((number(&fp.field) - 40.0).abs() < 1e-9);
    let mut v = vec![c(0.0, 0.0); 4];
    velocity(&fp.field, &params, &mut v);
    // a stationary state only rotates its global phase: i dψ/dt = μψ
    for (vj, pj) in v.iter().zip(&fp.field) {
        assert!((vj * c(0.0, 1.0) - pj * fp.chemical_potential).norm() < 1e-9);
    }
    assert!(fp.is_hyperbolic(1e-3));
    let again = stability_exponents(&fp.field, fp.chemical_potential, &params).unwrap();
    assert!((again[0].re - fp.max_growth_rate()).abs() < 1e-8);
}

#[test]
fn lyapunov_at_a_hyperbolic_point_matches_its_linear_growth() {
    let params = LatticeParams::ring(4, 1.0, 4.0 / (std::f64::consts::PI * 40.0));
    let a = 20f64.sqrt();
    let seed = vec![c(0.0, 0.0), c(a, 0.0), c(0.0, 0.0), c(-a, 0.0)];
    let fp = find_fixed_point(&seed, &params, &NewtonOptions::default()).unwrap();
    let est = lyapunov(&fp.field, &params, 40.0, &LyapunovOptions::default()).unwrap();
    assert!(est.exponent > 0.0);
    assert!(est.block_exponents.len() == LyapunovOptions::default().blocks - 1);
    let rel = (est.exponent - fp.max_growth_rate()).abs() / fp.max_growth_rate();
    assert!(rel < 0.5, "Benettin {} vs linear {}", est.exponent, fp.max_growth_rate());
}

#[test]
fn invalid_inputs_are_rejected() {
    let params = LatticeParams::ring(3, 1.0, 0.1);
    assert!(gpe_flow(&[c(1.0, 0.0); 2], &params, 1.0, &FlowOptions::default()).is_err());
    assert!(gpe_flow(&[c(1.0, 0.0); 3], &params, 1.0, &FlowOptions::with_dt(0.0)).is_err());
    assert!(gpe_flow(&[c(f64::NAN, 0.0); 3], &params, 1.0, &FlowOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_conserves_number_and_energy(psi in field(), u in -0.5f64..0.5, phase in -1.0f64..1.0) {
        let params = LatticeParams::ring(psi.len(), 1.0, u).with_phase(phase);
        let traj = gpe_flow(&psi, &params, 5.0, &FlowOptions::with_dt(0.01)).unwrap();
        let n = traj.numbers();
        let e = traj.energies(&params);
        let scale = 1.0 + e[0].abs();
        for (nk, ek) in n.iter().zip(&e) {
            prop_assert!((nk - n[0]).abs() < 1e-10 * n[0].max(1.0));
            prop_assert!((ek - e[0]).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn flow_is_time_reversible(psi in field(), u in -0.5f64..0.5) {
        // H is real for phase 0, so conjugation reverses time
        let params = LatticeParams::open_chain(psi.len(), 1.0, u);
        let fwd = gpe_flow(&psi, &params, 2.0, &FlowOptions::with_dt(0.005)).unwrap();
        let mirrored: Vec<Complex64> = fwd.final_field().iter().map(|z| z.conj()).collect();
        let back = gpe_flow(&mirrored, &params, 2.0, &FlowOptions::with_dt(0.005)).unwrap();
        let restored: Vec<Complex64> = back.final_field().iter().map(|z| z.conj()).collect();
        prop_assert!(common::max_abs_diff(&restored, &psi) < 1e-9);
    }
}
