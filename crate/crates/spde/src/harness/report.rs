//! Deterministic CSV and plain-text outputs. Error values are written with 17
//! significant digits so reruns with the same seed are byte-identical
//! regression artifacts.

use super::{ConvergenceReport, ReferenceKind};
use crate::error::{Result, SpdeError};
use std::fmt::Write as _;
use std::path::Path;

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Fixed schema: a per-path block `scheme,level,path,sup_error`, then a
/// per-level aggregate block `level,lp_error,p,n_paths`.
pub fn write_errors_csv(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    out.push_str("scheme,level,path,sup_error\n");
    for (li, level) in report.levels.iter().enumerate() {
        for (pi, path) in report.included_paths.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                report.scheme.as_str(),
                level,
                path,
                sig17(report.sup_errors[li][pi])
            );
        }
    }
    out.push_str("level,lp_error,p,n_paths\n");
    for (li, level) in report.levels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            level,
            sig17(report.lp_errors[li]),
            trim_number(report.p),
            report.included_paths.len()
        );
    }
    out
}

fn trim_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Human-readable run summary, equally deterministic.
pub fn render_report(report: &ConvergenceReport) -> String {
    let m = &report.meta;
    let mut out = String::new();
    let _ = writeln!(out, "scheme            = {}", report.scheme.as_str());
    let _ = writeln!(out, "levels            = {:?}", report.levels);
    let _ = writeln!(out, "reference_level   = {}", m.reference_level);
    let _ = writeln!(
        out,
        "reference         = {}",
        match m.reference {
            ReferenceKind::SelfScheme => "self",
            ReferenceKind::Spectral => "spectral",
        }
    );
    let _ = writeln!(out, "drift             = {}", m.drift_label);
    let _ = writeln!(out, "diffusion         = {}", m.diffusion_label);
    let _ = writeln!(out, "noise_modes       = {}", m.noise_modes);
    let _ = writeln!(out, "initial           = {}", m.initial_label);
    let _ = writeln!(out, "t_final           = {}", trim_number(m.t_final));
    let _ = writeln!(out, "steps             = {}", m.steps);
    let _ = writeln!(out, "dt                = {}", sig17(m.dt));
    if let Some(q) = m.quadrature {
        let _ = writeln!(out, "quadrature        = {q}");
    }
    let _ = writeln!(out, "seed              = {}", m.seed);
    let _ = writeln!(
        out,
        "paths             = {} included, {} excluded",
        report.included_paths.len(),
        report.excluded_paths.len()
    );
    if !report.excluded_paths.is_empty() {
        let _ = writeln!(out, "excluded          = {:?}", report.excluded_paths);
    }
    let _ = writeln!(out, "p                 = {}", trim_number(report.p));
    let _ = writeln!(out, "eta               = {}", trim_number(m.eta));
    let _ = writeln!(out, "rate_exponent     = {}", trim_number(m.rate_exponent));
    match m.predicted_rate_cap {
        Some(cap) => {
            let _ = writeln!(out, "predicted_rate_cap = {cap:.4}");
        }
        None => {
            let _ = writeln!(
                out,
                "predicted_rate_cap = none (metadata admits no positive smoothness at this p)"
            );
        }
    }
    if let Some(norm) = m.initial_fractional_norm {
        let _ = writeln!(
            out,
            "initial fractional norm (spectral-frame proxy at eta) = {norm:.6}"
        );
    }
    out.push('\n');
    let _ = writeln!(out, "L^p coupled-path errors:");
    for (level, err) in report.levels.iter().zip(&report.lp_errors) {
        let _ = writeln!(out, "  level {level:>6}: {}", sig17(*err));
    }
    out.push('\n');
    match &report.fit {
        Some(fit) => {
            let _ = writeln!(
                out,
                "fitted order      = {:.4} (stderr {:.4}, R^2 {:.6}, dropped {})",
                fit.slope, fit.stderr, fit.r_squared, fit.dropped
            );
        }
        None => {
            let _ = writeln!(out, "fitted order      = unavailable");
        }
    }
    let _ = writeln!(out, "chi L^p moment    = {}", sig17(report.chi.lp_moment));
    match report.chi.trend_slope {
        Some(s) => {
            let _ = writeln!(out, "chi trend slope   = {s:.4}");
        }
        None => {
            let _ = writeln!(out, "chi trend slope   = unavailable");
        }
    }
    if !m.warnings.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "warnings:");
        for w in &m.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}

/// Write `errors.csv` and `report.txt` into `dir`, creating it if needed.
pub fn save_report(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SpdeError::io(dir, e))?;
    let csv_path = dir.join("errors.csv");
    std::fs::write(&csv_path, write_errors_csv(report)).map_err(|e| SpdeError::io(&csv_path, e))?;
    let txt_path = dir.join("report.txt");
    std::fs::write(&txt_path, render_report(report)).map_err(|e| SpdeError::io(&txt_path, e))?;
    Ok(())
}
