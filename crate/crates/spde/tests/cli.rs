//! End-to-end checks of the command-line interface: exit codes, file outputs,
//! and byte-level determinism of the CSV artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spde")
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary must run")
}

const SMALL_CFG: &str = "
[equation]
operator = heat
drift = zero
diffusion = additive:1.0
noise = white:64
initial = smooth4

[discretization]
scheme = spectral
levels = 4,8,16
reference_level = 64
t_final = 1.0
steps = 200

[experiment]
paths = 6
p = 4
eta = 0.25
seed = 11
";

const LOCAL_CFG: &str = "
[equation]
operator = heat
drift = sin_u2
diffusion = additive:0.5
noise = qwiener:1.5,8
initial = smooth4:1.5

[discretization]
scheme = spectral
levels = 4
reference_level = 8
t_final = 0.5
steps = 200

[experiment]
paths = 8
cutoffs = 2,4
seed = 3
";

#[test]
fn converge_writes_outputs_and_is_deterministic() {
    let dir = tmp("cli-converge");
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, SMALL_CFG).unwrap();

    let out1 = dir.join("run1");
    let status = run(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let csv1 = std::fs::read(out1.join("errors.csv")).unwrap();
    assert!(out1.join("report.txt").exists());

    let out2 = dir.join("run2");
    let status = run(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let csv2 = std::fs::read(out2.join("errors.csv")).unwrap();
    assert_eq!(csv1, csv2, "same seed must reproduce every output byte");

    // a different seed must actually change the numbers
    let out3 = dir.join("run3");
    run(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "43",
        "--out",
        out3.to_str().unwrap(),
    ]);
    let csv3 = std::fs::read(out3.join("errors.csv")).unwrap();
    assert_ne!(csv1, csv3);
}

#[test]
fn missing_config_exits_3() {
    let status = run(&["converge", "--config", "/nonexistent/nowhere.cfg"]);
    assert_eq!(status.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    let unknown_flag = run(&["converge", "--definitely-not-a-flag"]);
    assert_eq!(unknown_flag.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("usage"));

    let unknown_sub = run(&["transmogrify"]);
    assert_eq!(unknown_sub.status.code(), Some(1));

    let none = run(&[]);
    assert_eq!(none.status.code(), Some(1));

    let dir = tmp("cli-badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(
        &cfg,
        "[equation]\ndriftt = zero\n[discretization]\nlevels = 4,8,16\n",
    )
    .unwrap();
    let bad = run(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn coeffs_level_three_prints_fifteen_lines() {
    let out = run(&["coeffs", "--level", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 15, "2n-1 = 5 entries per target mode, 3 modes");
    for k in 1..=3 {
        let count = lines
            .iter()
            .filter(|l| l.starts_with(&format!("{k} ")))
            .count();
        assert_eq!(count, 5);
    }
}

#[test]
fn simulate_dumps_readable_trajectory() {
    let dir = tmp("cli-simulate");
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, SMALL_CFG).unwrap();
    let status = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(status.status.code(), Some(0));
    let states = spde::io::read_trajectory(&dir.join("trajectory.bin")).unwrap();
    assert_eq!(states.len(), 201);
    assert_eq!(states[0].len(), 64);
}

#[test]
fn defect_writes_table() {
    let dir = tmp("cli-defect");
    let cfg = dir.join("small.cfg");
    std::fs::write(&cfg, SMALL_CFG).unwrap();
    let status = run(&[
        "defect",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("defects.csv")).unwrap();
    assert!(csv.starts_with("level,delta,defect,power_law"));
    // header + 4 deltas x 3 levels
    assert_eq!(csv.lines().count(), 1 + 12);
}

#[test]
fn localize_reports_fractions() {
    let dir = tmp("cli-localize");
    let cfg = dir.join("local.cfg");
    std::fs::write(&cfg, LOCAL_CFG).unwrap();
    let status = run(&[
        "localize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let text = std::fs::read_to_string(dir.join("localization.txt")).unwrap();
    assert!(text.contains("cutoff"));
    assert!(text.contains("paths             = 8"));
}
