use super::*;
use crate::initial::InitialCondition;
use crate::noise::NoiseBasisSpec;
use crate::nonlin::{DiffusionSpec, DriftSpec};
use std::f64::consts::PI;

fn base_spectral_config() -> ExperimentConfig {
    ExperimentConfig {
        scheme: Scheme::Spectral,
        operator: SpectralOperator::heat(),
        coefficient: CoefficientFn::One,
        drift: DriftSpec::zero(),
        diffusion: DiffusionSpec::additive(1.0, NoiseBasisSpec::white(64).unwrap(), -0.26),
        initial: InitialCondition::smooth4(),
        levels: vec![4, 8, 16],
        reference_level: 64,
        reference: ReferenceKind::SelfScheme,
        t_final: 1.0,
        steps: 200,
        quadrature: None,
        paths: 4,
        p: 4.0,
        eta: 0.25,
        master_seed: 7,
        parallel: false,
        cutoffs: Vec::new(),
    }
}

#[test]
fn fit_order_exact_power_law() {
    let fit = fit_order(
        &[4, 8, 16],
        &[
            16.0_f64.recip() * 3.0,
            64.0_f64.recip() * 3.0,
            256.0_f64.recip() * 3.0,
        ],
    )
    .unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-12, "slope {}", fit.slope);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(fit.stderr.abs() < 1e-12);
    assert_eq!(fit.dropped, 0);
}

#[test]
fn fit_order_constant_errors() {
    let fit = fit_order(&[2, 4, 8, 16], &[0.5; 4]).unwrap();
    assert!(fit.slope.abs() < 1e-14);
}

#[test]
fn fit_order_hand_computed() {
    // errors (1, 1/2, 1/4) at n = (1, 2, 4): slope exactly 1
    let fit = fit_order(&[1, 2, 4], &[1.0, 0.5, 0.25]).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-12);
}

#[test]
fn fit_order_drops_zero_levels() {
    let fit = fit_order(&[2, 4, 8, 16], &[0.0, 0.4, 0.2, 0.1]).unwrap();
    assert_eq!(fit.dropped, 1);
    assert!((fit.slope - 1.0).abs() < 1e-12);
    assert!(fit_order(&[2, 4, 8], &[0.0, 0.0, 0.5]).is_err());
}

#[test]
fn chi_recovers_exact_power_law_per_path() {
    // errors exactly chi_i n^{-r}: chi recovered, trend slope 0
    let levels = vec![2usize, 4, 8, 16];
    let chis = [1.5, 0.7, 2.2];
    let r = 1.25;
    let sup_errors: Vec<Vec<f64>> = levels
        .iter()
        .map(|n| chis.iter().map(|c| c * (*n as f64).powf(-r)).collect())
        .collect();
    let stats = compute_chi(&levels, &sup_errors, r, 4.0);
    for (got, want) in stats.per_path.iter().zip(&chis) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert!(stats.trend_slope.unwrap().abs() < 1e-12);
    assert!(stats.lp_moment.is_finite() && stats.lp_moment > 0.0);

    // rate exponent too large by 0.5 shows up as a +0.5 trend
    let stats = compute_chi(&levels, &sup_errors, r + 0.5, 4.0);
    assert!((stats.trend_slope.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn validate_rejects_bad_shapes() {
    let mut cfg = base_spectral_config();
    cfg.reference_level = 16;
    assert!(cfg.validate().is_err(), "reference must exceed levels");

    let mut cfg = base_spectral_config();
    cfg.levels = vec![8, 4];
    assert!(cfg.validate().is_err(), "levels must be increasing");

    let mut cfg = base_spectral_config();
    cfg.p = 2.0;
    assert!(cfg.validate().is_err(), "p must exceed 2");

    let mut cfg = base_spectral_config();
    cfg.drift.theta_f = -1.0;
    assert!(cfg.validate().is_err(), "theta_f must exceed -1");

    let mut cfg = base_spectral_config();
    cfg.diffusion.theta_g = -0.5;
    assert!(cfg.validate().is_err(), "theta_g must exceed -1/2");
}

#[test]
fn validate_warns_on_eta_violation() {
    let mut cfg = base_spectral_config();
    cfg.eta = 0.9; // white noise metadata cannot support this
    let warnings = cfg.validate().unwrap();
    assert!(!warnings.is_empty());
}

#[test]
fn band_limited_data_gives_zero_coarse_error() {
    // x0 on 4 modes, no noise, no drift: the level-4 solve is exact
    let mut cfg = base_spectral_config();
    cfg.diffusion = DiffusionSpec::additive(0.0, NoiseBasisSpec::white(4).unwrap(), -0.26);
    cfg.levels = vec![4, 8];
    cfg.reference_level = 16;
    let report = run_convergence(&cfg).unwrap();
    assert!(report.lp_errors.iter().all(|e| *e == 0.0));
    assert!(report.fit.is_none(), "all-zero errors cannot be fitted");
    assert!(report
        .meta
        .warnings
        .iter()
        .any(|w| w.contains("order fit unavailable")));
}

#[test]
fn diagonal_nesting_reflected_in_report() {
    // additive noise with q_j = 0 beyond mode 4: levels 4 and 8 are both exact
    let mut q = vec![0.0; 16];
    for (j, slot) in q.iter_mut().enumerate().take(4) {
        *slot = 1.0 / (j + 1) as f64;
    }
    let mut cfg = base_spectral_config();
    cfg.diffusion = DiffusionSpec::additive(1.0, NoiseBasisSpec::q_wiener(q).unwrap(), 0.49);
    cfg.levels = vec![4, 8];
    cfg.reference_level = 16;
    let report = run_convergence(&cfg).unwrap();
    assert_eq!(report.lp_errors, vec![0.0, 0.0]);
}

#[test]
fn convergence_report_deterministic_across_parallelism() {
    let mut serial = base_spectral_config();
    serial.parallel = false;
    let mut parallel = base_spectral_config();
    parallel.parallel = true;
    let a = run_convergence(&serial).unwrap();
    let b = run_convergence(&parallel).unwrap();
    assert_eq!(write_errors_csv(&a), write_errors_csv(&b));
}

#[test]
fn spectral_defect_study_slopes_exact() {
    let op = SpectralOperator::heat();
    let study = spectral_defect_study(&op, &[2, 4, 8], &[0.0, 0.25, 0.5, 1.0]).unwrap();
    assert_eq!(study.lambda0, 1.0);
    // table values at the fixed shift
    let expected = [
        1.0 / (1.0 + 9.0 * PI * PI),
        1.0 / (1.0 + 25.0 * PI * PI),
        1.0 / (1.0 + 81.0 * PI * PI),
    ];
    for (got, want) in study.defects[3].iter().zip(&expected) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    // shift-free column is an exact power law: slope alpha * delta
    for (delta, slope) in study.deltas.iter().zip(&study.fitted_slopes) {
        assert!(
            (slope - 2.0 * delta).abs() < 1e-6,
            "delta {delta}: slope {slope}"
        );
    }
}

#[test]
fn fem_defect_study_second_order() {
    let exact = |x: f64| (PI * x).sin() / (PI * PI);
    let study = fem_defect_study(
        &[8, 16, 32, 64],
        CoefficientFn::One,
        |x| (PI * x).sin(),
        Some(&exact),
    )
    .unwrap();
    assert!(
        (study.fit.slope - 2.0).abs() < 0.1,
        "slope {}",
        study.fit.slope
    );
}

#[test]
fn config_round_trip_from_text() {
    let text = "
# benchmark
[equation]
operator = heat
drift = zero
diffusion = additive:1.0
noise = white:64
initial = smooth4
theta_g = -0.26

[discretization]
scheme = spectral
levels = 4,8,16
reference_level = 64
t_final = 1.0
steps = 200

[experiment]
paths = 4
p = 4
eta = 0.25
seed = 7
parallel = false
";
    let cfg = ExperimentConfig::from_str_cfg(text).unwrap();
    assert_eq!(cfg.levels, vec![4, 8, 16]);
    assert_eq!(cfg.reference_level, 64);
    assert_eq!(cfg.paths, 4);
    assert_eq!(cfg.master_seed, 7);
    assert!(!cfg.parallel);
    assert_eq!(cfg.diffusion.basis.modes(), 64);
}

#[test]
fn config_rejects_unknown_keys() {
    let text = "
[equation]
driftt = zero

[discretization]
levels = 4,8,16
";
    let err = ExperimentConfig::from_str_cfg(text).unwrap_err();
    assert!(err.to_string().contains("driftt"), "{err}");

    let nosection = "drift = zero\n";
    assert!(ExperimentConfig::from_str_cfg(nosection).is_err());
}

#[test]
fn fem_error_vs_spectral_reference_monotone_on_deterministic_benchmark() {
    // cross-discretization comparison: mesh solutions measured against the
    // spectral solve of the same (noise-free) problem shrink monotonically
    let cfg = ExperimentConfig {
        scheme: Scheme::Fem,
        operator: SpectralOperator::heat(),
        coefficient: CoefficientFn::One,
        drift: DriftSpec::zero(),
        diffusion: DiffusionSpec::additive(0.0, NoiseBasisSpec::white(8).unwrap(), -0.26),
        initial: InitialCondition::sin_pi(),
        levels: vec![8, 16, 32],
        reference_level: 64,
        reference: ReferenceKind::Spectral,
        t_final: 0.2,
        steps: 2000,
        quadrature: None,
        paths: 1,
        p: 4.0,
        eta: 0.75,
        master_seed: 0,
        parallel: false,
        cutoffs: Vec::new(),
    };
    let report = run_convergence(&cfg).unwrap();
    for w in report.lp_errors.windows(2) {
        assert!(w[1] < w[0], "errors must decrease: {:?}", report.lp_errors);
    }
    let ratio = report.lp_errors[0] / report.lp_errors[1];
    assert!(ratio > 3.0, "roughly second order expected, ratio {ratio}");
}

#[test]
fn fem_spectral_reference_requires_aligned_additive_noise() {
    let mut cfg = base_spectral_config();
    cfg.scheme = Scheme::Fem;
    cfg.reference = ReferenceKind::Spectral;
    cfg.diffusion = DiffusionSpec::identity(NoiseBasisSpec::cosine(16).unwrap());
    cfg.levels = vec![4, 8];
    cfg.reference_level = 32;
    assert!(run_convergence(&cfg).is_err());
}

#[test]
fn predicted_rate_cap_reflects_metadata() {
    let mut cfg = base_spectral_config();
    // white-noise metadata at p = 4 supports no positive smoothness
    assert!(cfg.predicted_rate_cap().is_none());
    cfg.diffusion.theta_g = 0.49;
    let cap = cfg.predicted_rate_cap().unwrap();
    assert!(cap > 0.0 && cap < 2.0, "cap {cap}");
    // the guaranteed mesh regime needs eta >= 1/2, out of reach at p = 4 for
    // this metadata but available at p = 8
    cfg.scheme = Scheme::Fem;
    assert!(cfg.predicted_rate_cap().is_none());
    cfg.p = 8.0;
    let cap = cfg.predicted_rate_cap().unwrap();
    assert!((1.0..=2.0).contains(&cap), "cap {cap}");
}

#[test]
fn localization_agreement_and_monotone_fractions() {
    let mut cfg = base_spectral_config();
    cfg.drift = DriftSpec::sin_square();
    cfg.diffusion =
        DiffusionSpec::additive(0.6, NoiseBasisSpec::q_wiener_decay(1.5, 16).unwrap(), 0.49);
    cfg.initial = InitialCondition::Smooth4 { scale: 1.2 };
    cfg.levels = vec![4];
    cfg.reference_level = 12;
    cfg.steps = 400;
    cfg.paths = 16;
    cfg.cutoffs = vec![1.0, 2.0, 6.0];
    let report = run_localization(&cfg).unwrap();
    for w in report.fraction_full.windows(2) {
        assert!(
            w[1] >= w[0],
            "fractions must be nondecreasing: {:?}",
            report.fraction_full
        );
    }
    assert_eq!(report.checked_pairs, 3 * cfg.paths);
    // the initial norm exceeds the smallest cutoff, so its windows collapse
    // to the initial state and are recorded as vacuous
    assert!(report.vacuous_windows > 0);
    assert!(report.exit_steps[0].iter().all(|e| *e == Some(0)));
}

#[test]
fn exploding_paths_fail_the_exclusion_budget() {
    // a strongly expansive drift overflows every path; the run must refuse to
    // report rates from a wholly excluded ensemble
    let mut cfg = base_spectral_config();
    cfg.drift = DriftSpec::affine(5000.0, 0.0);
    cfg.steps = 400;
    cfg.levels = vec![2, 4];
    cfg.reference_level = 8;
    cfg.paths = 4;
    let err = run_convergence(&cfg).unwrap_err();
    assert!(err.to_string().contains("5%"), "{err}");
}

#[test]
fn localization_requires_local_nonlinearity() {
    let mut cfg = base_spectral_config();
    cfg.cutoffs = vec![1.0, 2.0];
    assert!(
        run_localization(&cfg).is_err(),
        "globally Lipschitz catalog rejected"
    );
}

#[test]
fn csv_has_both_blocks() {
    let mut cfg = base_spectral_config();
    cfg.paths = 2;
    let report = run_convergence(&cfg).unwrap();
    let csv = write_errors_csv(&report);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "scheme,level,path,sup_error");
    let body: Vec<&str> = csv.lines().collect();
    let agg_header = body
        .iter()
        .position(|l| *l == "level,lp_error,p,n_paths")
        .unwrap();
    assert_eq!(agg_header, 1 + cfg.levels.len() * cfg.paths);
    assert_eq!(
        body.len(),
        2 + cfg.levels.len() * cfg.paths + cfg.levels.len()
    );
    assert!(body[1].starts_with("spectral,4,0,"));
    let rendered = render_report(&report);
    assert!(rendered.contains("fitted order"));
}
