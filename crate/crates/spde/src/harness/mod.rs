//! Experiment orchestration: coupled-path convergence studies across
//! truncation levels, empirical order fitting, pathwise constants, defect
//! tables, and localization runs.
//!
//! Paths are the unit of parallelism. Each path derives its streams from
//! `(seed, path)` and simulates the reference plus every level on the same
//! increments; aggregation is a deterministic reduction in path order, so
//! results do not depend on the scheduling.

mod config;
mod report;

pub use config::ExperimentConfig;
pub use report::{render_report, save_report, write_errors_csv};

use crate::error::{Result, SpdeError};
use crate::fem::{
    assemble, l2_error_nested, l2_error_vs_modal, solve_fem, CoefficientFn, FemRun, Mesh1D,
    NodalState,
};
use crate::grid::TimeGrid;
use crate::modes::{resolvent_shift, ModeVector};
use crate::noise::{sample_increment_rows, GenMode, IncrementTable};
use crate::nonlin::{first_exit_step, CutoffLevel, LipschitzKind};
use crate::spectral::{resolvent_defect_spectral, solve_spectral, GalerkinRun, SpectralOperator};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Spectral,
    Fem,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Spectral => "spectral",
            Scheme::Fem => "fem",
        }
    }
}

/// What the levels are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Same discretization at `reference_level`.
    SelfScheme,
    /// Spectral solve at `reference_level` (cross-discretization comparison
    /// for mesh runs; requires additive noise over the sine eigenbasis so
    /// both schemes consume the same increments).
    Spectral,
}

/// Least-squares power-law fit on `(log level, log error)`. Positive slope
/// means the error decays like `level^(-slope)`.
#[derive(Clone, Copy, Debug)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r_squared: f64,
    pub dropped: usize,
}

fn log_log_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let b = sxy / sxx;
    let a = mean_y - b * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let fitted = a + b * x;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let dof = xs.len().saturating_sub(2);
    let stderr = if dof > 0 && sxx > 0.0 {
        (ss_res / dof as f64 / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if ss_tot <= f64::MIN_POSITIVE {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    (b, a, stderr, r_squared)
}

/// Fit `log error` against `log level`. Levels with nonpositive error are
/// dropped (they carry no power-law information); fewer than three surviving
/// points is an error.
pub fn fit_order(levels: &[usize], errors: &[f64]) -> Result<OrderFit> {
    if levels.len() != errors.len() {
        return Err(SpdeError::invalid(
            "levels and errors must have equal length",
        ));
    }
    let mut xs = Vec::with_capacity(levels.len());
    let mut ys = Vec::with_capacity(levels.len());
    for (l, e) in levels.iter().zip(errors) {
        if *e > 0.0 && e.is_finite() {
            xs.push((*l as f64).ln());
            ys.push(e.ln());
        }
    }
    let dropped = levels.len() - xs.len();
    if xs.len() < 3 {
        return Err(SpdeError::Numerical(format!(
            "order fit needs at least 3 positive errors, kept {}",
            xs.len()
        )));
    }
    let (b, a, stderr, r_squared) = log_log_fit(&xs, &ys);
    Ok(OrderFit {
        slope: -b,
        intercept: a,
        stderr,
        r_squared,
        dropped,
    })
}

/// Per-path pathwise constants `chi_i = max_levels error * level^rate` and a
/// trend diagnostic: the log-log slope of `max_i error_i(level) * level^rate`
/// against the level. A slope near zero says the rate holds pathwise; a
/// clearly positive slope flags a rate exponent set too high.
#[derive(Clone, Debug)]
pub struct ChiStats {
    pub rate_exponent: f64,
    pub per_path: Vec<f64>,
    pub lp_moment: f64,
    pub trend_slope: Option<f64>,
}

fn compute_chi(levels: &[usize], sup_errors: &[Vec<f64>], rate_exponent: f64, p: f64) -> ChiStats {
    let paths = sup_errors.first().map_or(0, |v| v.len());
    let mut per_path = vec![0.0f64; paths];
    for (li, level) in levels.iter().enumerate() {
        let weight = (*level as f64).powf(rate_exponent);
        for (pi, chi) in per_path.iter_mut().enumerate() {
            *chi = chi.max(sup_errors[li][pi] * weight);
        }
    }
    let lp_moment = if paths == 0 {
        0.0
    } else {
        (per_path.iter().map(|c| c.powf(p)).sum::<f64>() / paths as f64).powf(1.0 / p)
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (li, level) in levels.iter().enumerate() {
        let worst = sup_errors[li].iter().cloned().fold(0.0f64, f64::max);
        let weighted = worst * (*level as f64).powf(rate_exponent);
        if weighted > 0.0 {
            xs.push((*level as f64).ln());
            ys.push(weighted.ln());
        }
    }
    let trend_slope = if xs.len() >= 2 {
        Some(log_log_fit(&xs, &ys).0)
    } else {
        None
    };
    ChiStats {
        rate_exponent,
        per_path,
        lp_moment,
        trend_slope,
    }
}

/// Everything a convergence run produces.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub levels: Vec<usize>,
    /// `sup_errors[level][path]` over included paths, path order fixed.
    pub sup_errors: Vec<Vec<f64>>,
    pub included_paths: Vec<u64>,
    pub excluded_paths: Vec<u64>,
    pub p: f64,
    pub lp_errors: Vec<f64>,
    pub fit: Option<OrderFit>,
    pub chi: ChiStats,
    pub meta: RunMetadata,
}

#[derive(Clone, Debug)]
pub struct RunMetadata {
    pub seed: u64,
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub quadrature: Option<usize>,
    pub reference_level: usize,
    pub reference: ReferenceKind,
    pub drift_label: String,
    pub diffusion_label: String,
    pub noise_modes: usize,
    pub initial_label: String,
    pub eta: f64,
    pub rate_exponent: f64,
    /// Largest rate the (theta_f, theta_g, p) metadata supports, when any.
    pub predicted_rate_cap: Option<f64>,
    /// Fractional norm of the initial data in the spectral frame; for mesh
    /// runs this is the labeled proxy for the Sobolev norm of `u_0`.
    pub initial_fractional_norm: Option<f64>,
    pub warnings: Vec<String>,
}

/// Recompute chi statistics of a finished report at another rate exponent.
pub fn pathwise_chi(report: &ConvergenceReport, rate_exponent: f64) -> ChiStats {
    compute_chi(&report.levels, &report.sup_errors, rate_exponent, report.p)
}

enum PathOutcome {
    Included(Vec<f64>),
    Excluded,
}

fn spectral_run_at(cfg: &ExperimentConfig, level: usize) -> Result<GalerkinRun> {
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    match cfg.quadrature {
        Some(q) => GalerkinRun::with_quadrature(
            cfg.operator.clone(),
            level,
            cfg.drift.clone(),
            cfg.diffusion.clone(),
            grid,
            cfg.initial.mode_coefficients(level),
            q,
        ),
        None => GalerkinRun::new(
            cfg.operator.clone(),
            level,
            cfg.drift.clone(),
            cfg.diffusion.clone(),
            grid,
            cfg.initial.mode_coefficients(level),
        ),
    }
}

fn fem_run_at(
    cfg: &ExperimentConfig,
    elements: usize,
    cutoff: Option<CutoffLevel>,
) -> Result<FemRun> {
    Ok(FemRun {
        mesh: Mesh1D::new(elements)?,
        coefficient: cfg.coefficient,
        drift: cfg.drift.clone(),
        diffusion: cfg.diffusion.clone(),
        grid: TimeGrid::new(cfg.t_final, cfg.steps)?,
        initial: cfg.initial.clone(),
        cutoff,
    })
}

fn spectral_sup_error(reference: &[ModeVector], level: &[ModeVector]) -> f64 {
    let mut sup = 0.0f64;
    for (r, u) in reference.iter().zip(level) {
        let rs = r.as_slice();
        let us = u.as_slice();
        let mut acc = 0.0;
        for (k, rv) in rs.iter().enumerate() {
            let diff = rv - us.get(k).copied().unwrap_or(0.0);
            acc += diff * diff;
        }
        sup = sup.max(acc.sqrt());
    }
    sup
}

fn spectral_path(cfg: &ExperimentConfig, path: u64) -> Result<PathOutcome> {
    let ref_run = spectral_run_at(cfg, cfg.reference_level)?;
    let needed = ref_run.noise_modes_needed().max(1);
    let table = sample_increment_rows(
        needed,
        &ref_run.grid,
        cfg.master_seed,
        path,
        GenMode::Independent,
    )?;
    let ref_states = match solve_spectral(&ref_run, &table) {
        Ok(s) => s,
        Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
        Err(e) => return Err(e),
    };
    let mut errors = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let run = spectral_run_at(cfg, level)?;
        match solve_spectral(&run, &table) {
            Ok(states) => errors.push(spectral_sup_error(&ref_states, &states)),
            Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
            Err(e) => return Err(e),
        }
    }
    Ok(PathOutcome::Included(errors))
}

fn fem_path(cfg: &ExperimentConfig, path: u64) -> Result<PathOutcome> {
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    match cfg.reference {
        ReferenceKind::SelfScheme => {
            let ref_run = fem_run_at(cfg, cfg.reference_level, None)?;
            let rows = ref_run.noise_modes_needed().max(1);
            let table =
                sample_increment_rows(rows, &grid, cfg.master_seed, path, GenMode::Independent)?;
            let ref_states = match solve_fem(&ref_run, &table) {
                Ok(s) => s,
                Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
                Err(e) => return Err(e),
            };
            let ref_mesh = ref_run.mesh;
            let mut errors = Vec::with_capacity(cfg.levels.len());
            for &level in &cfg.levels {
                let run = fem_run_at(cfg, level, None)?;
                let states = match solve_fem(&run, &table) {
                    Ok(s) => s,
                    Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
                    Err(e) => return Err(e),
                };
                let mut sup = 0.0f64;
                for (r, u) in ref_states.iter().zip(&states) {
                    sup = sup.max(l2_error_nested(&run.mesh, u, &ref_mesh, r)?);
                }
                errors.push(sup);
            }
            Ok(PathOutcome::Included(errors))
        }
        ReferenceKind::Spectral => {
            if !(cfg.diffusion.is_additive() && cfg.diffusion.basis.is_sine_aligned()) {
                return Err(SpdeError::invalid(
                    "spectral reference for mesh runs requires additive sine-basis noise",
                ));
            }
            if cfg.coefficient != CoefficientFn::One {
                return Err(SpdeError::invalid(
                    "spectral reference models a unit coefficient; use reference = self for variable coefficients",
                ));
            }
            let ref_run = spectral_run_at(cfg, cfg.reference_level)?;
            let rows = ref_run
                .noise_modes_needed()
                .max(cfg.diffusion.basis.modes())
                .max(1);
            let table =
                sample_increment_rows(rows, &grid, cfg.master_seed, path, GenMode::Independent)?;
            let ref_states = match solve_spectral(&ref_run, &table) {
                Ok(s) => s,
                Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
                Err(e) => return Err(e),
            };
            let mut errors = Vec::with_capacity(cfg.levels.len());
            for &level in &cfg.levels {
                let run = fem_run_at(cfg, level, None)?;
                let states = match solve_fem(&run, &table) {
                    Ok(s) => s,
                    Err(SpdeError::NonFiniteState { .. }) => return Ok(PathOutcome::Excluded),
                    Err(e) => return Err(e),
                };
                let mut sup = 0.0f64;
                for (r, u) in ref_states.iter().zip(&states) {
                    sup = sup.max(l2_error_vs_modal(&run.mesh, u, r));
                }
                errors.push(sup);
            }
            Ok(PathOutcome::Included(errors))
        }
    }
}

fn run_one_path(cfg: &ExperimentConfig, path: u64) -> Result<PathOutcome> {
    match cfg.scheme {
        Scheme::Spectral => spectral_path(cfg, path),
        Scheme::Fem => fem_path(cfg, path),
    }
}

/// Simulate reference and levels on shared streams for every path, aggregate
/// coupled-path sup errors into `L^p` moments, fit the empirical order.
///
/// Paths whose state turns non-finite are excluded and recorded; more than 5%
/// exclusions fails the run.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let warnings = cfg.validate()?;
    let outcomes: Vec<(u64, Result<PathOutcome>)> = if cfg.parallel {
        (0..cfg.paths as u64)
            .into_par_iter()
            .map(|path| (path, run_one_path(cfg, path)))
            .collect()
    } else {
        (0..cfg.paths as u64)
            .map(|path| (path, run_one_path(cfg, path)))
            .collect()
    };

    let mut included_paths = Vec::new();
    let mut excluded_paths = Vec::new();
    let mut per_path_errors: Vec<Vec<f64>> = Vec::new();
    for (path, outcome) in outcomes {
        match outcome? {
            PathOutcome::Included(errors) => {
                included_paths.push(path);
                per_path_errors.push(errors);
            }
            PathOutcome::Excluded => excluded_paths.push(path),
        }
    }
    if excluded_paths.len() * 20 > cfg.paths {
        return Err(SpdeError::Numerical(format!(
            "{} of {} paths diverged, above the 5% exclusion budget",
            excluded_paths.len(),
            cfg.paths
        )));
    }

    // transpose to [level][path]
    let mut sup_errors = vec![Vec::with_capacity(included_paths.len()); cfg.levels.len()];
    for path_errors in &per_path_errors {
        for (li, e) in path_errors.iter().enumerate() {
            sup_errors[li].push(*e);
        }
    }
    let n_inc = included_paths.len().max(1) as f64;
    let lp_errors: Vec<f64> = sup_errors
        .iter()
        .map(|es| (es.iter().map(|e| e.powf(cfg.p)).sum::<f64>() / n_inc).powf(1.0 / cfg.p))
        .collect();

    let mut warnings = warnings;
    let fit = match fit_order(&cfg.levels, &lp_errors) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("order fit unavailable: {e}"));
            None
        }
    };
    let rate_exponent = cfg.rate_exponent();
    let chi = compute_chi(&cfg.levels, &sup_errors, rate_exponent, cfg.p);

    let initial_fractional_norm = {
        let modes = 64.max(cfg.reference_level.min(256));
        let coeffs = cfg.initial.mode_coefficients(modes);
        cfg.operator.eigenvalues(modes).ok().and_then(|eigs| {
            let lambda0 = crate::modes::resolvent_shift(&eigs);
            crate::modes::fractional_norm(&coeffs, cfg.eta, lambda0, &eigs).ok()
        })
    };

    let meta = RunMetadata {
        seed: cfg.master_seed,
        t_final: cfg.t_final,
        steps: cfg.steps,
        dt: cfg.t_final / cfg.steps as f64,
        quadrature: cfg.quadrature,
        reference_level: cfg.reference_level,
        reference: cfg.reference,
        drift_label: cfg.drift.label.clone(),
        diffusion_label: cfg.diffusion.label.clone(),
        noise_modes: cfg.diffusion.basis.modes(),
        initial_label: cfg.initial_label(),
        eta: cfg.eta,
        rate_exponent,
        predicted_rate_cap: cfg.predicted_rate_cap(),
        initial_fractional_norm,
        warnings,
    };

    Ok(ConvergenceReport {
        scheme: cfg.scheme,
        levels: cfg.levels.clone(),
        sup_errors,
        included_paths,
        excluded_paths,
        p: cfg.p,
        lp_errors,
        fit,
        chi,
        meta,
    })
}

/// Outcome of a localization study over nested cutoff levels.
#[derive(Clone, Debug)]
pub struct LocalizationReport {
    pub cutoffs: Vec<f64>,
    /// Per cutoff: fraction of paths that never hit the ball boundary.
    pub fraction_full: Vec<f64>,
    /// `exit_steps[cutoff][path]`: first grid index at or past the level.
    pub exit_steps: Vec<Vec<Option<usize>>>,
    pub paths: usize,
    /// Agreement windows containing only the initial state.
    pub vacuous_windows: usize,
    pub checked_pairs: usize,
}

/// Run every cutoff level on shared streams and verify that any two solutions
/// agree bit for bit up to the smaller level's exit index. Disagreement inside
/// the window is a consistency failure, not a statistical event.
pub fn run_localization(cfg: &ExperimentConfig) -> Result<LocalizationReport> {
    if cfg.cutoffs.is_empty() {
        return Err(SpdeError::invalid(
            "localization needs at least one cutoff level",
        ));
    }
    if cfg.drift.lipschitz != LipschitzKind::Local
        && cfg.diffusion.lipschitz != LipschitzKind::Local
    {
        return Err(SpdeError::invalid(
            "localization study expects a locally Lipschitz drift or diffusion",
        ));
    }
    let mut cutoffs = cfg.cutoffs.clone();
    cutoffs.sort_by(f64::total_cmp);
    let levels: Vec<CutoffLevel> = cutoffs
        .iter()
        .map(|m| CutoffLevel::new(*m))
        .collect::<Result<_>>()?;

    struct PathData {
        exits: Vec<Option<usize>>,
        vacuous: usize,
        pairs: usize,
    }

    let one_path = |path: u64| -> Result<PathData> {
        // trajectories per cutoff level, plus their norms on the grid
        let mut trajectories: Vec<Vec<Vec<f64>>> = Vec::with_capacity(levels.len());
        let mut norms: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
        match cfg.scheme {
            Scheme::Spectral => {
                let base = spectral_run_at(cfg, cfg.reference_level)?;
                let rows = base.noise_modes_needed().max(1);
                let table = sample_increment_rows(
                    rows,
                    &base.grid,
                    cfg.master_seed,
                    path,
                    GenMode::Independent,
                )?;
                for level in &levels {
                    let run = spectral_run_at(cfg, cfg.reference_level)?.with_cutoff(*level);
                    let states = solve_spectral(&run, &table)?;
                    norms.push(states.iter().map(|s| s.l2_norm()).collect());
                    trajectories.push(states.into_iter().map(ModeVector::into_vec).collect());
                }
            }
            Scheme::Fem => {
                let base = fem_run_at(cfg, cfg.reference_level, None)?;
                let rows = base.noise_modes_needed().max(1);
                let table = sample_increment_rows(
                    rows,
                    &base.grid,
                    cfg.master_seed,
                    path,
                    GenMode::Independent,
                )?;
                let mats = assemble(&base.mesh, |x| base.coefficient.eval(x))?;
                for level in &levels {
                    let run = fem_run_at(cfg, cfg.reference_level, Some(*level))?;
                    let states = solve_fem(&run, &table)?;
                    norms.push(states.iter().map(|s| mats.mass_norm(&s.0)).collect());
                    trajectories.push(states.into_iter().map(|s| s.0).collect());
                }
            }
        }

        let exits: Vec<Option<usize>> = levels
            .iter()
            .zip(&norms)
            .map(|(level, ns)| first_exit_step(ns, level))
            .collect();

        let mut vacuous = 0usize;
        let mut pairs = 0usize;
        for i in 0..levels.len() {
            for j in (i + 1)..levels.len() {
                let window_end = exits[i].unwrap_or(trajectories[i].len() - 1);
                if window_end == 0 {
                    vacuous += 1;
                }
                for m in 0..=window_end {
                    if trajectories[i][m] != trajectories[j][m] {
                        return Err(SpdeError::Numerical(format!(
                            "cutoff solutions m={} and m={} disagree at step {m} on path {path} \
                             inside the agreement window",
                            cutoffs[i], cutoffs[j]
                        )));
                    }
                }
                pairs += 1;
            }
        }
        Ok(PathData {
            exits,
            vacuous,
            pairs,
        })
    };

    let results: Vec<Result<PathData>> = if cfg.parallel {
        (0..cfg.paths as u64)
            .into_par_iter()
            .map(one_path)
            .collect()
    } else {
        (0..cfg.paths as u64).map(one_path).collect()
    };

    let mut exit_steps = vec![Vec::with_capacity(cfg.paths); levels.len()];
    let mut vacuous_windows = 0;
    let mut checked_pairs = 0;
    for r in results {
        let data = r?;
        for (li, e) in data.exits.iter().enumerate() {
            exit_steps[li].push(*e);
        }
        vacuous_windows += data.vacuous;
        checked_pairs += data.pairs;
    }
    let fraction_full: Vec<f64> = exit_steps
        .iter()
        .map(|es| es.iter().filter(|e| e.is_none()).count() as f64 / cfg.paths as f64)
        .collect();

    Ok(LocalizationReport {
        cutoffs,
        fraction_full,
        exit_steps,
        paths: cfg.paths,
        vacuous_windows,
        checked_pairs,
    })
}

/// Resolvent-defect table for the spectral truncation.
#[derive(Clone, Debug)]
pub struct SpectralDefectStudy {
    pub levels: Vec<usize>,
    pub deltas: Vec<f64>,
    pub lambda0: f64,
    /// `defects[delta][level]` at the fixed resolvent shift.
    pub defects: Vec<Vec<f64>>,
    /// Shift-free column `|lambda_{n+1}|^{-delta}`: an exact power law when
    /// the eigenvalues are, evaluated at the valid resolvent point 0.
    pub power_law: Vec<Vec<f64>>,
    /// Log-log slope of the shift-free column against `level + 1`.
    pub fitted_slopes: Vec<f64>,
}

pub fn spectral_defect_study(
    op: &SpectralOperator,
    levels: &[usize],
    deltas: &[f64],
) -> Result<SpectralDefectStudy> {
    if levels.len() < 3 {
        return Err(SpdeError::invalid(
            "defect study needs at least three levels",
        ));
    }
    let max_level = *levels.iter().max().unwrap();
    let eigs = op.eigenvalues(max_level + 1)?;
    let lambda0 = resolvent_shift(&eigs);
    let shift_free = if eigs[0] < 0.0 { 0.0 } else { lambda0 };
    let mut defects = Vec::with_capacity(deltas.len());
    let mut power_law = Vec::with_capacity(deltas.len());
    let mut fitted_slopes = Vec::with_capacity(deltas.len());
    let successors: Vec<usize> = levels.iter().map(|n| n + 1).collect();
    for &delta in deltas {
        let row: Vec<f64> = levels
            .iter()
            .map(|&n| resolvent_defect_spectral(op, n, delta, lambda0))
            .collect::<Result<_>>()?;
        let pl: Vec<f64> = levels
            .iter()
            .map(|&n| resolvent_defect_spectral(op, n, delta, shift_free))
            .collect::<Result<_>>()?;
        let slope = fit_order(&successors, &pl)?.slope;
        defects.push(row);
        power_law.push(pl);
        fitted_slopes.push(slope);
    }
    Ok(SpectralDefectStudy {
        levels: levels.to_vec(),
        deltas: deltas.to_vec(),
        lambda0,
        defects,
        power_law,
        fitted_slopes,
    })
}

/// Elliptic-projection defect over a mesh family plus its fitted order.
#[derive(Clone, Debug)]
pub struct FemDefectStudy {
    pub meshes: Vec<usize>,
    pub defects: Vec<f64>,
    pub fit: OrderFit,
}

pub fn fem_defect_study(
    meshes: &[usize],
    coefficient: CoefficientFn,
    rhs: impl Fn(f64) -> f64 + Copy,
    exact: Option<&dyn Fn(f64) -> f64>,
) -> Result<FemDefectStudy> {
    let mut defects = Vec::with_capacity(meshes.len());
    for &ne in meshes {
        let mesh = Mesh1D::new(ne)?;
        let mats = assemble(&mesh, |x| coefficient.eval(x))?;
        defects.push(crate::fem::elliptic_defect(&mesh, &mats, rhs, exact)?);
    }
    let fit = fit_order(meshes, &defects)?;
    Ok(FemDefectStudy {
        meshes: meshes.to_vec(),
        defects,
        fit,
    })
}

/// Simulate a single trajectory of the configured problem at the reference
/// level; returns the states as plain rows for dumping.
pub fn simulate_single(cfg: &ExperimentConfig, path: u64) -> Result<Vec<Vec<f64>>> {
    match cfg.scheme {
        Scheme::Spectral => {
            let run = spectral_run_at(cfg, cfg.reference_level)?;
            let rows = run.noise_modes_needed().max(1);
            let table = sample_increment_rows(
                rows,
                &run.grid,
                cfg.master_seed,
                path,
                GenMode::Independent,
            )?;
            Ok(solve_spectral(&run, &table)?
                .into_iter()
                .map(ModeVector::into_vec)
                .collect())
        }
        Scheme::Fem => {
            let run = fem_run_at(cfg, cfg.reference_level, None)?;
            let rows = run.noise_modes_needed().max(1);
            let table = sample_increment_rows(
                rows,
                &run.grid,
                cfg.master_seed,
                path,
                GenMode::Independent,
            )?;
            Ok(solve_fem(&run, &table)?
                .into_iter()
                .map(|s: NodalState| s.0)
                .collect())
        }
    }
}

/// The increment table the configured problem would consume on `path`.
pub fn sample_table_for(cfg: &ExperimentConfig, path: u64) -> Result<IncrementTable> {
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    let rows = match cfg.scheme {
        Scheme::Spectral => spectral_run_at(cfg, cfg.reference_level)?.noise_modes_needed(),
        Scheme::Fem => cfg.diffusion.basis.modes(),
    };
    sample_increment_rows(
        rows.max(1),
        &grid,
        cfg.master_seed,
        path,
        GenMode::Independent,
    )
}

#[cfg(test)]
mod tests;
