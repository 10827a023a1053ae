mod common;

use common::{c, dense_hamiltonian, DenseEvolution};
use fockchaos::fock::{build_basis, LatticeParams};
use fockchaos::quantum::uniform_grid;
use fockchaos::twa::{
    sample_wigner, twa_expectation, twa_return, Symbol, TwaOptions, QUADRATURE_STD,
};
use num_complex::Complex64;

fn center() -> Vec<Complex64> {
    vec![c(1.2, 0.0), c(0.0, -0.8), c(0.5, 0.5)]
}

#[test]
fn wigner_samples_have_the_vacuum_spread() {
    let b = center();
    let ens = sample_wigner(&b, 40_000, 17).unwrap();
    for (j, bj) in b.iter().enumerate() {
        let n = ens.len() as f64;
        let mean: Complex64 = ens.samples.iter().map(|s| s[j]).sum::<Complex64>() / n;
        let var_re = ens.samples.iter().map(|s| (s[j].re - mean.re).powi(2)).sum::<f64>() / n;
        let var_im = ens.samples.iter().map(|s| (s[j].im - mean.im).powi(2)).sum::<f64>() / n;
        assert!((mean - bj).norm() < 0.02);
        assert!((var_re - QUADRATURE_STD.powi(2)).abs() < 0.01);
        assert!((var_im - QUADRATURE_STD.powi(2)).abs() < 0.01);
    }
    assert_eq!(sample_wigner(&b, 10, 17).unwrap().samples, sample_wigner(&b, 10, 17).unwrap().samples);
    assert_ne!(sample_wigner(&b, 10, 17).unwrap().samples, sample_wigner(&b, 10, 18).unwrap().samples);
    assert!(sample_wigner(&b, 0, 1).is_err());
}

#[test]
fn weyl_symbols_reproduce_quantum_means_at_time_zero() {
    let b = center();
    let params = LatticeParams::ring(3, 1.0, 0.4).with_onsite(vec![0.3, -0.5, 0.2]);
    let ens = sample_wigner(&b, 20_000, 5).unwrap();
    let times = [0.0, 0.1];
    let opts = TwaOptions::default();
    let number = twa_expectation(&Symbol::TotalNumber, &ens, &params, &times, &opts).unwrap();
    let mean: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    assert!((number.mean[0] - mean).abs() < 4.0 * number.std_error[0] + 1e-12);
    // the total number is conserved along every trajectory
    assert!((number.mean[1] - number.mean[0]).abs() < 1e-9);

    // <b|H|b> for a coherent state: hopping on amplitudes plus ε|b|² + (U/2)|b|⁴ per site
    let energy = twa_expectation(&Symbol::Energy, &ens, &params, &times, &opts).unwrap();
    let mut want = 0.0;
    for (a, bb) in params.bonds() {
        want += -2.0 * params.hopping * (b[a].conj() * b[bb]).re;
    }
    want += b
        .iter()
        .zip(&params.onsite)
        .map(|(z, e)| e * z.norm_sqr() + 0.5 * params.interaction * z.norm_sqr().powi(2))
        .sum::<f64>();
    assert!((energy.mean[0] - want).abs() < 4.0 * energy.std_error[0] + 1e-12);
}

#[test]
fn return_probability_is_exact_without_interaction() {
    // For U = 0 the Wigner flow is linear and the estimator is exact in
    // expectation: C(t) = exp(-|β(t) - β|²).
    let b = center();
    let params = LatticeParams::ring(3, 1.0, 0.0).with_phase(0.5);
    let times = uniform_grid(0.0, 3.0, 13);
    let series = twa_return(&b, &params, &times, 20_000, 9, &TwaOptions::default()).unwrap();
    let one = build_basis(3, 1).unwrap();
    let states: Vec<Vec<u8>> = one.iter().map(|s| s.to_vec()).collect();
    let evo = DenseEvolution::new(&dense_hamiltonian(&params, &states));
    let beta = nalgebra::DVector::from_vec(b.clone());
    for (k, &t) in times.iter().enumerate() {
        let bt = evo.propagator(t) * &beta;
        let d: f64 = bt.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let want = (-d).exp();
        let got = series.mean[k];
        assert!(
            (got - want).abs() < 5.0 * series.std_error[k] + 1e-12,
            "t = {t}: {got} ± {} vs {want}",
            series.std_error[k]
        );
    }
}

#[test]
fn results_do_not_depend_on_batching() {
    let b = center();
    let params = LatticeParams::ring(3, 1.0, 0.3);
    let times = uniform_grid(0.0, 1.0, 5);
    let small = TwaOptions { batch: 7, ..TwaOptions::default() };
    let a = twa_return(&b, &params, &times, 50, 3, &small).unwrap();
    let b2 = twa_return(&b, &params, &times, 50, 3, &TwaOptions::default()).unwrap();
    assert_eq!(a.mean, b2.mean);
    assert_eq!(a.std_error, b2.std_error);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let params = LatticeParams::ring(4, 1.0, 0.3);
    let times = uniform_grid(0.0, 1.0, 5);
    assert!(twa_return(&center(), &params, &times, 10, 0, &TwaOptions::default()).is_err());
    let ens = sample_wigner(&[c(1.0, 0.0); 4], 4, 0).unwrap();
    assert!(twa_expectation(&Symbol::Occupation(7), &ens, &params, &times, &TwaOptions::default()).is_err());
    assert!(twa_expectation(&Symbol::Occupation(0), &ens, &params, &[0.0, 0.3, 1.0], &TwaOptions::default()).is_err());
}
