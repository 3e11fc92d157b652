//! Acceptance suite: one test per shipped guarantee, each printing a PASS/FAIL
//! line with the measured quantity. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use spde::fem::{self, CoefficientFn};
use spde::harness::{
    fem_defect_study, pathwise_chi, run_convergence, run_localization, spectral_defect_study,
    write_errors_csv, ExperimentConfig,
};
use spde::noise::{sample_increments, GenMode, NoiseBasisSpec};
use spde::spectral::{
    build_coupling_table, resolvent_defect_spectral, solve_spectral, GalerkinRun, SpectralOperator,
};
use spde::{DiffusionSpec, DriftSpec, InitialCondition, ModeVector, TimeGrid};
use std::f64::consts::PI;

fn check(name: &str, pass: bool, detail: String) {
    println!(
        "ACCEPTANCE {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn config(file: &str) -> ExperimentConfig {
    let path = format!("{}/../../configs/{file}", env!("CARGO_MANIFEST_DIR"));
    ExperimentConfig::from_file(path.as_ref()).expect("shipped config must parse")
}

#[test]
fn c01_spectral_rate_additive_white_noise() {
    let cfg = config("heat_white.cfg");
    let report = run_convergence(&cfg).expect("run must complete");
    let fit = report.fit.expect("order fit must exist");
    let in_band = (0.40..=0.60).contains(&fit.slope);
    let trend = report.chi.trend_slope.unwrap_or(f64::NAN);
    check(
        "C1 spectral rate, additive white noise",
        in_band && trend <= 0.1 && report.excluded_paths.is_empty(),
        format!(
            "fitted order {:.4} in [0.40, 0.60], chi trend {trend:.4} <= 0.1, R^2 {:.4}",
            fit.slope, fit.r_squared
        ),
    );
}

#[test]
fn c02_spectral_rate_multiplicative_identity() {
    let cfg = config("heat_mult.cfg");
    let report = run_convergence(&cfg).expect("run must complete");
    let fit = report.fit.expect("order fit must exist");
    let in_band = (0.35..=0.65).contains(&fit.slope);
    let monotone = report.lp_errors.windows(2).all(|w| w[1] <= w[0]);
    check(
        "C2 spectral rate, multiplicative g(u) = u",
        in_band && monotone && report.excluded_paths.is_empty(),
        format!(
            "fitted order {:.4} in [0.35, 0.65], R^2 {:.4}, errors nonincreasing {monotone}",
            fit.slope, fit.r_squared
        ),
    );
}

/// Composite Simpson quadrature of the triple product, panel count scaled to
/// the top frequency so every entry is resolved to ~1e-12.
fn overlap_quadrature(j: usize, k: usize, l: usize) -> f64 {
    let panels = 512 * (j + k + l);
    let f =
        |x: f64| (j as f64 * PI * x).sin() * (k as f64 * PI * x).sin() * (l as f64 * PI * x).cos();
    let h = 1.0 / panels as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..panels {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn c03_coupling_table_oracle() {
    use std::collections::HashMap;
    let mut cache: HashMap<(usize, usize, usize), f64> = HashMap::new();
    let mut worst: f64 = 0.0;
    let mut max_row = 0usize;
    let mut bound_ok = true;
    for n in 1..=16 {
        let table = build_coupling_table(n);
        for k in 1..=n {
            let row = table.entries(k);
            max_row = max_row.max(row.len());
            if row.len() > 2 * n - 1 {
                bound_ok = false;
            }
            for e in row {
                let oracle = *cache
                    .entry((e.source_mode, k, e.noise_mode))
                    .or_insert_with(|| overlap_quadrature(e.source_mode, k, e.noise_mode));
                worst = worst.max((e.coeff - std::f64::consts::SQRT_2 * oracle).abs());
            }
        }
    }
    check(
        "C3 coupling-table oracle",
        worst <= 1e-10 && bound_ok,
        format!("max |entry - sqrt(2) quadrature| = {worst:.3e} <= 1e-10, row size <= 2n-1"),
    );
}

#[test]
fn c04_resolvent_defect_exact() {
    let op = SpectralOperator::heat();
    let lambda0 = 1.0;
    let deltas = [0.0, 0.25, 0.5, 1.0];
    let mut worst: f64 = 0.0;
    for &delta in &deltas {
        for n in 1..=1000 {
            let got = resolvent_defect_spectral(&op, n, delta, lambda0).unwrap();
            let kk = ((n + 1) * (n + 1)) as f64;
            let expected = (lambda0 + PI * PI * kk).powf(-delta);
            worst = worst.max((got - expected).abs() / expected);
        }
    }
    // log-log slope of the shift-free power-law column: exactly alpha * delta
    let levels: Vec<usize> = (1..=9).map(|i| 2usize.pow(i)).collect();
    let study = spectral_defect_study(&op, &levels, &deltas).unwrap();
    let mut slope_err: f64 = 0.0;
    for (delta, slope) in study.deltas.iter().zip(&study.fitted_slopes) {
        slope_err = slope_err.max((slope - 2.0 * delta).abs());
    }
    check(
        "C4 spectral resolvent defect",
        worst <= 1e-15 && slope_err <= 1e-6,
        format!("formula deviation {worst:.2e} <= 1e-15, slope deviation {slope_err:.2e} <= 1e-6"),
    );
}

#[test]
fn c05_fem_elliptic_defect_order() {
    let exact = |x: f64| (PI * x).sin() / (PI * PI);
    let study = fem_defect_study(
        &[8, 16, 32, 64, 128],
        CoefficientFn::One,
        |x| (PI * x).sin(),
        Some(&exact),
    )
    .unwrap();
    let pass = (study.fit.slope - 2.0).abs() <= 0.1;
    check(
        "C5 FEM elliptic defect",
        pass,
        format!(
            "slope {:.4} within 2.0 +- 0.1, R^2 {:.6}",
            study.fit.slope, study.fit.r_squared
        ),
    );
}

#[test]
fn c06_fem_deterministic_order() {
    let meshes = [8usize, 16, 32, 64, 128];
    let t_final = 0.1;
    // dt = 1e-5 T: small enough that the backward-Euler amplitude error
    // (lambda^2 T dt / 2 relative) stays an order below the h^2 term at the
    // finest mesh
    let steps = 100_000;
    let errors: Vec<f64> = meshes
        .iter()
        .map(|ne| fem::heat_decay_l2_error(*ne, steps, t_final).unwrap())
        .collect();
    let fit = spde::harness::fit_order(&meshes, &errors).unwrap();
    let pass = (fit.slope - 2.0).abs() <= 0.15;
    check(
        "C6 FEM deterministic heat order",
        pass,
        format!(
            "slope {:.4} within 2.0 +- 0.15, errors {:?}",
            fit.slope, errors
        ),
    );
}

#[test]
fn c07_fem_stochastic_rate_smooth_noise() {
    let cfg = config("fem_smooth.cfg");
    let report = run_convergence(&cfg).expect("run must complete");
    let fit = report.fit.expect("order fit must exist");
    let trend = pathwise_chi(&report, cfg.rate_exponent())
        .trend_slope
        .unwrap_or(f64::NAN);
    let monotone = report.lp_errors.windows(2).all(|w| w[1] <= w[0]);
    check(
        "C7 FEM stochastic rate, smooth noise",
        fit.slope >= 1.2 && trend <= 0.1 && monotone && report.excluded_paths.is_empty(),
        format!(
            "fitted order {:.4} >= 1.2, chi trend {trend:.4} <= 0.1, errors nonincreasing {monotone}",
            fit.slope
        ),
    );
}

#[test]
fn c08_ou_distribution() {
    // single mode, lambda = -1, additive unit noise: variance of u(T) is
    // (1 - exp(-2 T)) / 2
    let paths = 10_000u64;
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let run = GalerkinRun::new(
        SpectralOperator::power(1.0, 1.0).unwrap(),
        1,
        DriftSpec::zero(),
        DiffusionSpec::additive(1.0, NoiseBasisSpec::white(1).unwrap(), -0.26),
        grid,
        ModeVector::zeros(1),
    )
    .unwrap();
    let mut finals = Vec::with_capacity(paths as usize);
    for path in 0..paths {
        let states = spde::spectral::solve_spectral_keyed(&run, 2024, path).unwrap();
        finals.push(states.last().unwrap().as_slice()[0]);
    }
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let expected = (1.0 - (-2.0f64).exp()) / 2.0;
    let se = expected * (2.0 / (n - 1.0)).sqrt();
    let dev = (var - expected).abs();
    check(
        "C8 OU distributional check",
        dev <= 3.0 * se,
        format!(
            "sample variance {var:.6} vs {expected:.6}, deviation {dev:.2e} <= 3 SE = {:.2e}",
            3.0 * se
        ),
    );
}

#[test]
fn c09_localization_suite() {
    let cfg = config("localize.cfg");
    // bitwise agreement inside every window is enforced by run_localization
    let report = run_localization(&cfg).expect("cutoff consistency must hold on every path");
    let monotone = report.fraction_full.windows(2).all(|w| w[1] >= w[0]);
    let full_at_top = report.fraction_full.last().copied().unwrap_or(0.0) == 1.0;
    check(
        "C9 localization suite",
        monotone && full_at_top,
        format!(
            "fractions {:?} nondecreasing, = 1 at m = {}, vacuous windows {}",
            report.fraction_full,
            report.cutoffs.last().unwrap(),
            report.vacuous_windows
        ),
    );
}

#[test]
fn c10_determinism_and_coupling() {
    // byte-identical CSV across serial and parallel runs, and across reruns
    let mut cfg = config("heat_white.cfg");
    cfg.levels = vec![4, 8, 16];
    cfg.reference_level = 64;
    cfg.steps = 200;
    cfg.paths = 8;
    cfg.parallel = false;
    let serial = write_errors_csv(&run_convergence(&cfg).unwrap());
    cfg.parallel = true;
    let parallel = write_errors_csv(&run_convergence(&cfg).unwrap());
    let rerun = write_errors_csv(&run_convergence(&cfg).unwrap());

    // shared modes of increment tables agree bitwise across truncations
    let grid = TimeGrid::new(1.0, 128).unwrap();
    let small = sample_increments(
        &NoiseBasisSpec::white(4).unwrap(),
        &grid,
        42,
        5,
        GenMode::Independent,
    )
    .unwrap();
    let large = sample_increments(
        &NoiseBasisSpec::white(64).unwrap(),
        &grid,
        42,
        5,
        GenMode::Independent,
    )
    .unwrap();
    let tables_match = (1..=4).all(|l| small.row(l) == large.row(l));

    // and the level-n additive-diagonal trajectory is the truncation of the
    // higher-level one, bit for bit
    let mk_run = |level: usize| {
        GalerkinRun::new(
            SpectralOperator::heat(),
            level,
            DriftSpec::zero(),
            DiffusionSpec::additive(1.0, NoiseBasisSpec::white(64).unwrap(), -0.26),
            grid.clone(),
            InitialCondition::smooth4().mode_coefficients(level),
        )
        .unwrap()
    };
    let lo = solve_spectral(&mk_run(4), &large).unwrap();
    let hi = solve_spectral(&mk_run(16), &large).unwrap();
    let nested = lo
        .iter()
        .zip(&hi)
        .all(|(a, b)| a.as_slice() == &b.as_slice()[..4]);

    check(
        "C10 determinism and coupling invariants",
        serial == parallel && serial == rerun && tables_match && nested,
        format!(
            "serial==parallel: {}, rerun identical: {}, shared-mode tables bitwise: {tables_match}, diagonal nesting bitwise: {nested}",
            serial == parallel,
            serial == rerun
        ),
    );
}
