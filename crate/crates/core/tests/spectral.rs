use fockchaos::spectral::{
    diagonal_ramp, form_factor, goe_form_factor, ks_test, poisson_spacing_cdf, ramp_slope, unfold,
    wigner_surmise_cdf, SymmetryClass, UnfoldMethod, MIN_LEVELS, MIN_REALIZATIONS,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn poisson_levels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = 0.0;
    (0..n)
        .map(|_| {
            e += -(1.0 - rng.random::<f64>()).ln();
            e
        })
        .collect()
}

fn goe_levels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let h = (&a + a.transpose()) * 0.5;
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn equally_spaced_levels_unfold_to_unit_spacing() {
    let levels: Vec<f64> = (0..1000).map(|k| 0.37 * k as f64 - 4.0).collect();
    for method in [UnfoldMethod::default(), UnfoldMethod::Polynomial { degree: 5 }] {
        let u = unfold(&levels, method, 0.05).unwrap();
        assert!(u.spacings().iter().all(|s| (s - 1.0).abs() < 1e-6), "{method:?}");
        assert!((u.mean_spacing() - 1.0).abs() < 1e-6);
        assert_eq!(u.bulk().len(), 900);
    }
}

#[test]
fn unfolding_validates_its_input() {
    let short: Vec<f64> = (0..MIN_LEVELS - 1).map(|k| k as f64).collect();
    assert!(unfold(&short, UnfoldMethod::default(), 0.05).is_err());
    let enough: Vec<f64> = (0..MIN_LEVELS).map(|k| k as f64).collect();
    assert!(unfold(&enough, UnfoldMethod::default(), 0.5).is_err());
    assert!(unfold(&enough, UnfoldMethod::default(), 0.1).is_ok());
}

#[test]
fn ks_statistic_of_a_small_sample() {
    let r = ks_test(&[0.7, 0.1, 0.4], |x| x.clamp(0.0, 1.0)).unwrap();
    assert!((r.statistic - 0.3).abs() < 1e-15);
    assert!(r.p_value > 0.5 && r.p_value <= 1.0);
    assert!(ks_test(&[], |x| x).is_err());
}

#[test]
fn poisson_spectrum_is_recognized() {
    // A kernel only a few spacings wide partly follows the clustering of
    // uncorrelated levels, so a flat spectrum is unfolded with a wide one.
    let wide = UnfoldMethod::GaussianCounting { spacings: 40.0 };
    let u = unfold(&poisson_levels(4000, 7), wide, 0.05).unwrap();
    let s = u.spacings();
    assert!(ks_test(&s, poisson_spacing_cdf).unwrap().p_value > 0.01);
    assert!(ks_test(&s, wigner_surmise_cdf).unwrap().p_value < 1e-6);
}

#[test]
fn goe_spectrum_is_recognized() {
    let spacings: Vec<f64> = (0..4)
        .flat_map(|seed| unfold(&goe_levels(400, seed), UnfoldMethod::default(), 0.1).unwrap().spacings())
        .collect();
    assert!(ks_test(&spacings, wigner_surmise_cdf).unwrap().p_value > 0.01);
    assert!(ks_test(&spacings, poisson_spacing_cdf).unwrap().p_value < 1e-6);
}

#[test]
fn goe_form_factor_closed_form() {
    assert!((goe_form_factor(1.0).unwrap() - (2.0 - 3f64.ln())).abs() < 1e-15);
    let below = goe_form_factor(1.0 - 1e-9).unwrap();
    let above = goe_form_factor(1.0 + 1e-9).unwrap();
    assert!((below - above).abs() < 1e-8);
    assert!((goe_form_factor(1e-4).unwrap() / 1e-4 - 2.0).abs() < 1e-3);
    assert!((goe_form_factor(50.0).unwrap() - 1.0).abs() < 1e-3);
    assert!(goe_form_factor(0.0).is_err());
    assert_eq!(diagonal_ramp(0.3, SymmetryClass::Orthogonal).unwrap(), 0.6);
    assert_eq!(SymmetryClass::from_beta(2).unwrap(), SymmetryClass::Unitary);
    assert!(SymmetryClass::from_beta(4).is_err());
}

#[test]
fn ramp_fit_recovers_a_line_through_the_origin() {
    let taus: Vec<f64> = (1..=50).map(|k| k as f64 * 0.02).collect();
    let k: Vec<f64> = taus.iter().map(|t| 1.7 * t).collect();
    assert!((ramp_slope(&taus, &k, 0.1, 0.4).unwrap() - 1.7).abs() < 1e-14);
    assert!(ramp_slope(&taus, &k, 2.0, 3.0).is_err());
}

#[test]
fn form_factor_of_uncorrelated_levels_is_flat() {
    let spectra: Vec<_> = (0..MIN_REALIZATIONS as u64)
        .map(|seed| unfold(&poisson_levels(1000, 100 + seed), UnfoldMethod::default(), 0.05).unwrap())
        .collect();
    let taus: Vec<f64> = (0..=36).map(|k| 0.2 + k as f64 * 0.05).collect();
    let k = form_factor(&spectra, &taus, 0.05).unwrap();
    let dev = k.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(dev < 0.15, "max deviation {dev}");
    assert!(form_factor(&spectra[..MIN_REALIZATIONS - 1], &taus, 0.1).is_err());
    assert!(form_factor(&spectra, &[0.0], 0.1).is_err());
}

#[test]
fn goe_form_factor_of_random_matrices_follows_the_ramp() {
    let spectra: Vec<_> =
        (0..50).map(|seed| unfold(&goe_levels(1000, 50 + seed), UnfoldMethod::default(), 0.1).unwrap()).collect();
    let taus: Vec<f64> = (0..=36).map(|k| 0.2 + k as f64 * 0.05).collect();
    let k = form_factor(&spectra, &taus, 0.05).unwrap();
    let dev = taus
        .iter()
        .zip(&k)
        .map(|(&t, &v)| (v - goe_form_factor(t).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.1, "max deviation {dev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn unfolding_is_affine_invariant(scale in 0.01f64..100.0, shift in -50.0f64..50.0, seed in 0u64..100) {
        let levels = goe_levels(250, seed);
        let moved: Vec<f64> = levels.iter().map(|e| scale * e + shift).collect();
        let a = unfold(&levels, UnfoldMethod::default(), 0.05).unwrap();
        let b = unfold(&moved, UnfoldMethod::default(), 0.05).unwrap();
        for (x, y) in a.spacings().iter().zip(b.spacings()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn unfolding_an_unfolded_spectrum_is_affine(seed in 0u64..100) {
        let once = unfold(&goe_levels(400, seed), UnfoldMethod::default(), 0.05).unwrap();
        let twice = unfold(&once.unfolded, UnfoldMethod::default(), 0.05).unwrap();
        let (x, y) = (once.bulk(), twice.bulk());
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let worst = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).abs()).fold(0.0, f64::max);
        prop_assert!((slope - 1.0).abs() < 0.01);
        prop_assert!(worst < 0.01 * (x[x.len() - 1] - x[0]));
    }

    #[test]
    fn unfolded_levels_are_ordered(seed in 0u64..100, degree in 3usize..12) {
        let levels = poisson_levels(500, seed);
        for method in [UnfoldMethod::default(), UnfoldMethod::Polynomial { degree }] {
            let u = unfold(&levels, method, 0.05).unwrap();
            prop_assert!(u.spacings().iter().all(|&s| s >= -1e-9));
            prop_assert!((u.mean_spacing() - 1.0).abs() < 0.2);
        }
    }

    #[test]
    fn spacing_cdfs_are_distribution_functions(s in 0.0f64..10.0, ds in 0.0f64..1.0) {
        for cdf in [poisson_spacing_cdf, wigner_surmise_cdf] {
            prop_assert!(cdf(s) >= 0.0 && cdf(s) <= 1.0);
            prop_assert!(cdf(s + ds) >= cdf(s));
        }
    }
}
