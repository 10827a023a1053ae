use std::f64::consts::PI;

use fockchaos::fock::{build_basis, LatticeParams, SparseHamiltonian};
use fockchaos::meanfield::{find_fixed_point, lyapunov, FlowOptions, LyapunovOptions, NewtonOptions};
use fockchaos::quantum::{
    autocorrelation, cbs_experiment, coherent_state, diagonalize, otoc, uniform_grid, Background,
    CbsOptions, HamiltonianFamily, MultiSectorState, SectorOperator, TruncationStatus,
};
use fockchaos::rwm::{
    classical_dos, exact_covariance, normalized_correlator, occupation_ball, pearson, semiclassical_matrix,
    GaussianWindow, SemiclassicalModel, SemiclassicalOptions, ShellSymbol,
};
use fockchaos::spectral::{
    diagonal_ramp, form_factor, goe_form_factor, ks_test, poisson_spacing_cdf, ramp_slope, unfold,
    wigner_surmise_cdf, SymmetryClass, UnfoldMethod,
};
use fockchaos::twa::{twa_return, TwaOptions};
use fockchaos::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::config::{
    AutocorrConfig, BackgroundChoice, CbsConfig, Config, LyapunovConfig, OtocConfig, RwmConfig, SpectraConfig,
    Study, TimeGrid, UnfoldChoice,
};
use crate::output::{num, Outcome, ResultTable};

pub fn run(config: &Config) -> Result<Outcome> {
    let lattice = &config.lattice;
    match &config.study {
        Study::Autocorr(c) => run_autocorr(lattice, c, config.seed),
        Study::Cbs(c) => run_cbs(lattice, c),
        Study::Rwm(c) => run_rwm(lattice, c, config.seed),
        Study::Otoc(c) => run_otoc(lattice, c, config.seed),
        Study::Spectra(c) => run_spectra(lattice, c, config.seed),
        Study::Lyapunov(c) => run_lyapunov(lattice, c, config.seed),
    }
}

fn grid(t: &TimeGrid) -> Vec<f64> {
    uniform_grid(t.start, t.end, t.points)
}

fn run_autocorr(lattice: &LatticeParams, c: &AutocorrConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let coherent = coherent_state(&c.amplitudes, c.sector_window)?;
    if coherent.status == TruncationStatus::Warning {
        out.warnings.push(format!("coherent state truncation weight {:e}", coherent.truncated_weight));
    }
    let times = grid(&c.time);
    let mut family = HamiltonianFamily::new(lattice.clone())?;
    let exact = autocorrelation(&mut family, &coherent.state, &times, c.tol)?;
    let twa = if c.twa_samples > 0 {
        let opts = TwaOptions { flow: FlowOptions::with_dt(c.twa_dt), ..TwaOptions::default() };
        Some(twa_return(&c.amplitudes, lattice, &times, c.twa_samples, seed, &opts)?)
    } else {
        None
    };
    let mut columns = vec!["t", "C_exact", "A_re", "A_im"];
    if twa.is_some() {
        columns.extend(["C_twa", "C_twa_stderr"]);
    }
    let mut table = ResultTable::new("autocorr", &columns);
    for (k, &t) in times.iter().enumerate() {
        let a = exact.amplitude.values()[k];
        let mut row = vec![num(t), num(exact.probability.values()[k]), num(a.re), num(a.im)];
        if let Some(w) = &twa {
            row.extend([num(w.mean[k]), num(w.std_error[k])]);
        }
        table.push(row);
    }
    out.tables.push(table);
    let peak = c.amplitudes.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    out.summary.insert("sectors".into(), json!(coherent.state.sector_count()));
    out.summary.insert("truncated_weight".into(), json!(coherent.truncated_weight));
    if lattice.interaction != 0.0 {
        out.summary.insert("tau1".into(), json!(2.0 * PI / (lattice.interaction.abs() * peak)));
        out.summary.insert("tau2".into(), json!(2.0 * PI / lattice.interaction.abs()));
    }
    if twa.is_some() {
        out.summary.insert("twa_samples".into(), json!(c.twa_samples));
    }
    Ok(out)
}

fn run_cbs(lattice: &LatticeParams, c: &CbsConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let background = match c.background {
        BackgroundChoice::Translations => Background::Translations,
        BackgroundChoice::EnergyShell(width) => Background::EnergyShell { width },
    };
    let opts = CbsOptions {
        window: c.window,
        samples: c.samples,
        equilibration: c.window.0,
        background,
        tol: c.tol,
        ..CbsOptions::for_hopping(lattice.hopping)
    };
    let points = cbs_experiment(lattice, &c.fock, &c.phases, &opts)?;
    let mut table = ResultTable::new(
        "cbs",
        &["phi", "g", "return_probability", "background", "background_states", "n_window_times", "drift", "stationary"],
    );
    for p in &points {
        if !p.stationary {
            out.warnings.push(format!("phase {}: return probability drifts by {:.1}% across the window", p.phase, 100.0 * p.drift));
        }
        table.push(vec![
            num(p.phase),
            num(p.enhancement),
            num(p.return_probability),
            num(p.background),
            p.background_states.to_string(),
            p.window_times.to_string(),
            num(p.drift),
            p.stationary.to_string(),
        ]);
    }
    out.tables.push(table);
    out.summary.insert("window".into(), json!([c.window.0, c.window.1]));
    Ok(out)
}

fn run_rwm(lattice: &LatticeParams, c: &RwmConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let basis = build_basis(lattice.sites, c.particles)?;
    let h = SparseHamiltonian::assemble(basis.clone(), lattice)?;
    let spectrum = diagonalize(&h, true)?;
    let center = c.center.unwrap_or_else(|| {
        let mut sorted = spectrum.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 2]
    });
    let window = GaussianWindow::new(center, c.width)?;
    let states = occupation_ball(&basis, &c.seed_state, c.radius);
    let exact = exact_covariance(&spectrum, &basis, &window, &states)?;
    out.warnings.extend(exact.warnings.iter().cloned());
    let dos = classical_dos(lattice, c.particles, &window, c.dos_samples, seed, ShellSymbol::FockDiagonal)?;
    let model = SemiclassicalModel::from_params(lattice)?;
    let opts = SemiclassicalOptions { q_max: c.q_max, ..SemiclassicalOptions::default() };
    let semi = semiclassical_matrix(&states, center, &model, &window, dos.level_density, &opts)?;
    let exact_norm = normalized_correlator(&exact)?;
    let semi_norm = normalized_correlator(&semi)?;
    let r = pearson(&exact_norm.upper_triangle(), &semi_norm.upper_triangle());

    let label = |s: &[u8]| s.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ");
    let mut table = ResultTable::new(
        "rwm",
        &["a", "b", "n", "m", "R_exact_re", "R_exact_im", "R_sc_re", "R_sc_im", "corr_exact", "corr_sc"],
    );
    for a in 0..states.len() {
        for b in a..states.len() {
            let (e, s) = (exact.get(a, b), semi.get(a, b));
            table.push(vec![
                a.to_string(),
                b.to_string(),
                label(&states[a]),
                label(&states[b]),
                num(e.re),
                num(e.im),
                num(s.re),
                num(s.im),
                num(exact_norm.get(a, b).re),
                num(semi_norm.get(a, b).re),
            ]);
        }
    }
    out.tables.push(table);
    out.summary.insert("center".into(), json!(center));
    out.summary.insert("width".into(), json!(c.width));
    out.summary.insert("states_in_window".into(), json!(exact.states_in_window));
    out.summary.insert("ball_states".into(), json!(states.len()));
    out.summary.insert("level_density".into(), json!(dos.level_density));
    out.summary.insert("level_density_stderr".into(), json!(dos.std_error * basis.len() as f64));
    out.summary.insert("pearson".into(), json!(r));
    out.summary.insert("semiclassical_hermiticity_defect".into(), json!(semi.hermiticity_defect()));
    Ok(out)
}

fn run_otoc(lattice: &LatticeParams, c: &OtocConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let center: Vec<Complex64> = if c.fixed_point {
        let fp = find_fixed_point(&c.amplitudes, lattice, &NewtonOptions::default())?;
        out.summary.insert("fixed_point_residual".into(), json!(fp.residual));
        out.summary.insert("fixed_point_growth_rate".into(), json!(fp.max_growth_rate()));
        fp.field
    } else {
        c.amplitudes.clone()
    };
    let lyap_opts = LyapunovOptions { seed, ..LyapunovOptions::default() };
    let lam = lyapunov(&center, lattice, c.lyapunov_duration, &lyap_opts)?;
    if !lam.converged {
        out.warnings.push("Lyapunov block exponents drift; estimate not converged".into());
    }
    let coherent = coherent_state(&center, c.sector_window)?;
    let state = match c.particles {
        Some(n) => MultiSectorState::single(coherent.state.projected(n)?),
        None => coherent.state,
    };
    let mean_n: f64 = match c.particles {
        Some(n) => n as f64,
        None => center.iter().map(|z| z.norm_sqr()).sum(),
    };
    let times = grid(&c.time);
    let mut family = HamiltonianFamily::new(lattice.clone())?;
    let series = otoc(
        &mut family,
        &SectorOperator::Occupation(c.v_site),
        &SectorOperator::Occupation(c.w_site),
        &state,
        &times,
        c.tol,
    )?;
    let mut table = ResultTable::new("otoc", &["t", "C_raw", "C_per_particle"]);
    for (&t, &v) in times.iter().zip(series.values()) {
        table.push(vec![num(t), num(v), num(v / (mean_n * mean_n))]);
    }
    out.tables.push(table);

    let log_n = mean_n.ln();
    let (fit_start, fit_end) = (1.0 / lam.exponent, log_n / lam.exponent);
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(series.values())
        .filter(|(&t, &v)| t >= fit_start && t <= fit_end && v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    let slope = if x.len() >= 2 { Some(least_squares_slope(&x, &y)) } else { None };
    if slope.is_none() {
        out.warnings.push("fewer than two grid points inside the growth window".into());
    }
    let mut fit = ResultTable::new(
        "otoc_fit",
        &["fit_start", "fit_end", "slope", "lambda_benettin", "lambda_stderr", "t_ehrenfest"],
    );
    fit.push(vec![
        num(fit_start),
        num(fit_end),
        slope.map(num).unwrap_or_default(),
        num(lam.exponent),
        num(lam.error),
        num(log_n / lam.exponent),
    ]);
    out.tables.push(fit);
    out.summary.insert("lambda".into(), json!(lam.exponent));
    out.summary.insert("slope".into(), json!(slope));
    out.summary.insert("t_ehrenfest".into(), json!(log_n / lam.exponent));
    Ok(out)
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn run_spectra(lattice: &LatticeParams, c: &SpectraConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let basis = build_basis(lattice.sites, c.particles)?;
    let method = match c.unfold {
        UnfoldChoice::Gaussian(spacings) => UnfoldMethod::GaussianCounting { spacings },
        UnfoldChoice::Polynomial(degree) => UnfoldMethod::Polynomial { degree },
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spectra = Vec::with_capacity(c.realizations);
    for _ in 0..c.realizations {
        let onsite: Vec<f64> = lattice
            .onsite
            .iter()
            .map(|&e| e + c.disorder * (rng.random::<f64>() - 0.5))
            .collect();
        let params = lattice.clone().with_onsite(onsite);
        let h = SparseHamiltonian::assemble(basis.clone(), &params)?;
        let values = diagonalize(&h, false)?.values().to_vec();
        spectra.push(unfold(&values, method, c.trim)?);
    }
    let spacings: Vec<f64> = spectra.iter().flat_map(|s| s.spacings()).collect();
    let poisson = ks_test(&spacings, poisson_spacing_cdf)?;
    let goe = ks_test(&spacings, wigner_surmise_cdf)?;
    let mut spacing_table = ResultTable::new("spacings", &["realization", "s"]);
    for (k, s) in spectra.iter().enumerate() {
        for v in s.spacings() {
            spacing_table.push(vec![k.to_string(), num(v)]);
        }
    }
    out.tables.push(spacing_table);

    let class = if lattice.phase == 0.0 { SymmetryClass::Orthogonal } else { SymmetryClass::Unitary };
    if spectra.len() >= fockchaos::spectral::MIN_REALIZATIONS {
        let step = c.tau_max / c.tau_points as f64;
        let taus: Vec<f64> = (1..=c.tau_points).map(|k| k as f64 * step).collect();
        let k = form_factor(&spectra, &taus, c.smoothing)?;
        let mut table = ResultTable::new("form_factor", &["tau", "K", "K_goe", "K_diagonal"]);
        for (&t, &v) in taus.iter().zip(&k) {
            table.push(vec![num(t), num(v), num(goe_form_factor(t)?), num(diagonal_ramp(t, class)?)]);
        }
        out.tables.push(table);
        match ramp_slope(&taus, &k, 0.05, 0.15) {
            Ok(s) => {
                out.summary.insert("ramp_slope".into(), json!(s));
            }
            Err(_) => out.warnings.push("no τ samples in [0.05, 0.15] for the ramp fit".into()),
        }
    } else {
        out.warnings.push(format!(
            "form factor skipped: {} realizations, at least {} needed",
            spectra.len(),
            fockchaos::spectral::MIN_REALIZATIONS
        ));
    }
    out.summary.insert("levels_per_realization".into(), json!(basis.len()));
    out.summary.insert("spacings".into(), json!(spacings.len()));
    out.summary.insert("ks_poisson".into(), json!({ "statistic": poisson.statistic, "p_value": poisson.p_value }));
    out.summary.insert("ks_goe".into(), json!({ "statistic": goe.statistic, "p_value": goe.p_value }));
    out.summary.insert("ramp_reference".into(), json!(class.ramp_slope()));
    Ok(out)
}

fn run_lyapunov(lattice: &LatticeParams, c: &LyapunovConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let opts = LyapunovOptions {
        renorm_interval: c.renorm_interval,
        blocks: c.blocks,
        seed,
        flow: FlowOptions::with_dt(c.dt),
        ..LyapunovOptions::default()
    };
    let est = lyapunov(&c.amplitudes, lattice, c.duration, &opts)?;
    if !est.converged {
        out.warnings.push("block exponents drift by more than the tolerance".into());
    }
    let mut table = ResultTable::new("lyapunov", &["block", "exponent"]);
    for (k, &e) in est.block_exponents.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), num(e)]);
    }
    out.tables.push(table);
    out.summary.insert("exponent".into(), json!(est.exponent));
    out.summary.insert("error".into(), json!(est.error));
    out.summary.insert("converged".into(), json!(est.converged));
    Ok(out)
}
