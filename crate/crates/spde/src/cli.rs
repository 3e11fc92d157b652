//! Command-line front end.
//!
//! Subcommands: `simulate` (one trajectory, binary dump), `converge`
//! (multi-level study, CSV + report), `defect` (resolvent/elliptic defect
//! table), `coeffs` (coupling-table dump), `localize` (cutoff study).
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.

use crate::error::SpdeError;
use crate::fem::CoefficientFn;
use crate::harness::{
    self, fem_defect_study, run_convergence, run_localization, save_report, spectral_defect_study,
    ExperimentConfig, Scheme,
};
use crate::spectral::build_coupling_table;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

const USAGE: &str = "usage: spde <subcommand> [flags]

subcommands:
  simulate   one trajectory at the reference level, dumped as SPDETRAJ
  converge   multi-level coupled-path study -> errors.csv, report.txt
  defect     resolvent / elliptic defect table -> defects.csv
  coeffs     multiplicative coupling table for one level (stdout)
  localize   cutoff localization study -> localization.txt

flags:
  --config <path>   experiment config file (required except for coeffs)
  --seed <u64>      override the master seed
  --paths <n>       override the path count
  --out <dir>       output directory (default .)
  --level <n>       coupling-table level (coeffs only)
  --quiet           suppress stdout summaries
";

struct Flags {
    config: Option<PathBuf>,
    seed: Option<u64>,
    paths: Option<usize>,
    out: PathBuf,
    level: Option<usize>,
    quiet: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        seed: None,
        paths: None,
        out: PathBuf::from("."),
        level: None,
        quiet: false,
    };
    let mut i = 0;
    while i < args.len() {
        let take_value = |i: &mut usize, name: &str| -> Result<String, String> {
            *i += 1;
            args.get(*i)
                .cloned()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match args[i].as_str() {
            "--config" => flags.config = Some(PathBuf::from(take_value(&mut i, "--config")?)),
            "--seed" => {
                flags.seed = Some(
                    take_value(&mut i, "--seed")?
                        .parse()
                        .map_err(|_| "bad --seed value".to_string())?,
                )
            }
            "--paths" => {
                flags.paths = Some(
                    take_value(&mut i, "--paths")?
                        .parse()
                        .map_err(|_| "bad --paths value".to_string())?,
                )
            }
            "--out" => flags.out = PathBuf::from(take_value(&mut i, "--out")?),
            "--level" => {
                flags.level = Some(
                    take_value(&mut i, "--level")?
                        .parse()
                        .map_err(|_| "bad --level value".to_string())?,
                )
            }
            "--quiet" => flags.quiet = true,
            other => return Err(format!("unknown flag `{other}`")),
        }
        i += 1;
    }
    Ok(flags)
}

fn exit_code_for(err: &SpdeError) -> i32 {
    match err {
        SpdeError::Io { .. } | SpdeError::Format(_) => EXIT_IO,
        SpdeError::Numerical(_) | SpdeError::NonFiniteState { .. } => EXIT_NUMERICAL,
        SpdeError::InvalidArgument(_) | SpdeError::Config(_) => EXIT_USAGE,
    }
}

fn load_config(flags: &Flags) -> Result<ExperimentConfig, SpdeError> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| SpdeError::invalid("this subcommand needs --config"))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = flags.seed {
        cfg.master_seed = seed;
    }
    if let Some(paths) = flags.paths {
        cfg.paths = paths;
    }
    Ok(cfg)
}

fn ensure_out_dir(dir: &Path) -> Result<(), SpdeError> {
    std::fs::create_dir_all(dir).map_err(|e| SpdeError::io(dir, e))
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_converge(flags: &Flags) -> Result<(), SpdeError> {
    let cfg = load_config(flags)?;
    let report = run_convergence(&cfg)?;
    ensure_out_dir(&flags.out)?;
    save_report(&report, &flags.out)?;
    for w in &report.meta.warnings {
        eprintln!("warning: {w}");
    }
    if !flags.quiet {
        match &report.fit {
            Some(fit) => println!(
                "fitted order {:.4} (stderr {:.4}, R^2 {:.6}) over levels {:?}",
                fit.slope, fit.stderr, fit.r_squared, report.levels
            ),
            None => println!("order fit unavailable"),
        }
        println!("wrote {}", flags.out.join("errors.csv").display());
    }
    Ok(())
}

fn cmd_simulate(flags: &Flags) -> Result<(), SpdeError> {
    let cfg = load_config(flags)?;
    let states = harness::simulate_single(&cfg, 0)?;
    ensure_out_dir(&flags.out)?;
    let path = flags.out.join("trajectory.bin");
    crate::io::write_trajectory(&path, &states)?;
    if !flags.quiet {
        let last = states
            .last()
            .map(|s| s.iter().map(|v| v * v).sum::<f64>().sqrt());
        println!(
            "simulated {} time nodes, final state 2-norm {}",
            states.len(),
            last.map_or("n/a".into(), sig17)
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_defect(flags: &Flags) -> Result<(), SpdeError> {
    let cfg = load_config(flags)?;
    ensure_out_dir(&flags.out)?;
    let mut csv = String::new();
    match cfg.scheme {
        Scheme::Spectral => {
            let deltas = [0.0, 0.25, 0.5, 1.0];
            let study = spectral_defect_study(&cfg.operator, &cfg.levels, &deltas)?;
            csv.push_str("level,delta,defect,power_law\n");
            for (di, delta) in study.deltas.iter().enumerate() {
                for (li, level) in study.levels.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{level},{delta},{},{}",
                        sig17(study.defects[di][li]),
                        sig17(study.power_law[di][li])
                    );
                }
            }
            if !flags.quiet {
                println!("lambda0 = {}", study.lambda0);
                for (delta, slope) in study.deltas.iter().zip(&study.fitted_slopes) {
                    println!("delta {delta}: fitted slope {slope:.8}");
                }
            }
        }
        Scheme::Fem => {
            use std::f64::consts::PI;
            let exact = |x: f64| (PI * x).sin() / (PI * PI);
            let study = fem_defect_study(
                &cfg.levels,
                CoefficientFn::One,
                |x| (PI * x).sin(),
                Some(&exact),
            )?;
            csv.push_str("elements,defect\n");
            for (ne, d) in study.meshes.iter().zip(&study.defects) {
                let _ = writeln!(csv, "{ne},{}", sig17(*d));
            }
            if !flags.quiet {
                println!(
                    "elliptic defect slope {:.4} (stderr {:.4})",
                    study.fit.slope, study.fit.stderr
                );
            }
        }
    }
    let path = flags.out.join("defects.csv");
    std::fs::write(&path, csv).map_err(|e| SpdeError::io(&path, e))?;
    if !flags.quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_coeffs(flags: &Flags) -> Result<(), SpdeError> {
    let level = flags
        .level
        .ok_or_else(|| SpdeError::invalid("coeffs needs --level <n>"))?;
    if level == 0 {
        return Err(SpdeError::invalid("--level must be at least 1"));
    }
    let table = build_coupling_table(level);
    let mut out = String::new();
    for k in 1..=level {
        for e in table.entries(k) {
            let _ = writeln!(
                out,
                "{k} {} {} {}",
                e.noise_mode,
                e.source_mode,
                sig17(e.coeff)
            );
        }
    }
    print!("{out}");
    Ok(())
}

fn cmd_localize(flags: &Flags) -> Result<(), SpdeError> {
    let cfg = load_config(flags)?;
    let report = run_localization(&cfg)?;
    ensure_out_dir(&flags.out)?;
    let mut text = String::new();
    let _ = writeln!(text, "paths             = {}", report.paths);
    let _ = writeln!(text, "checked_pairs     = {}", report.checked_pairs);
    let _ = writeln!(text, "vacuous_windows   = {}", report.vacuous_windows);
    for (m, frac) in report.cutoffs.iter().zip(&report.fraction_full) {
        let _ = writeln!(
            text,
            "cutoff {m:>8}: fraction reaching the horizon = {frac}"
        );
    }
    let path = flags.out.join("localization.txt");
    std::fs::write(&path, &text).map_err(|e| SpdeError::io(&path, e))?;
    if !flags.quiet {
        print!("{text}");
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn cli_main(args: Vec<String>) -> i32 {
    let Some(subcommand) = args.first() else {
        eprint!("{USAGE}");
        return EXIT_USAGE;
    };
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return EXIT_USAGE;
        }
    };
    let result = match subcommand.as_str() {
        "simulate" => cmd_simulate(&flags),
        "converge" => cmd_converge(&flags),
        "defect" => cmd_defect(&flags),
        "coeffs" => cmd_coeffs(&flags),
        "localize" => cmd_localize(&flags),
        other => {
            eprintln!("error: unknown subcommand `{other}`");
            eprint!("{USAGE}");
            return EXIT_USAGE;
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, SpdeError::InvalidArgument(_) | SpdeError::Config(_)) {
                eprint!("{USAGE}");
            }
            exit_code_for(&err)
        }
    }
}
