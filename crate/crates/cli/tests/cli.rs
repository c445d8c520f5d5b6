use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use liability_cli::output::fmt_num;
use liability_core::equilibrium::{nash_hh, stackelberg_ah};
use liability_core::{Params, Solver};

fn liability(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liability"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn solve_writes_the_equilibrium_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = liability(dir.path(), &["-q", "solve", "--p", "0.5", "--k", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&dir.path().join("equilibrium.csv"));
    assert_eq!(rows.len(), 2);

    let (par, s) = (Params::base(), Solver::default());
    let hh = nash_hh(&par, &s).unwrap();
    let st = stackelberg_ah(1.0, 0.5, &par, &s).unwrap();
    assert_eq!(rows[1][column(&rows, "c_a")], fmt_num(st.c_a));
    assert_eq!(rows[1][column(&rows, "c_h_ah")], fmt_num(st.c_h));
    assert_eq!(rows[1][column(&rows, "c_h_hh_1")], fmt_num(hh.c1));
    for name in ["sc", "tr", "tl", "tc"] {
        let v: f64 = rows[1][column(&rows, name)].parse().unwrap();
        assert!(v.is_finite() && v > 0.0, "{name}");
    }
    assert!(out.stdout.starts_with(b"p = 0.5"));
    assert!(dir.path().join("run.manifest.txt").exists());
}

#[test]
fn check_prints_four_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = liability(dir.path(), &["-q", "check", "--p-grid", "0.5"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    for (i, l) in lines.iter().enumerate() {
        assert!(l.starts_with(&format!("condition {}: PASS", i + 1)), "{l}");
    }
    assert_eq!(csv(&dir.path().join("sse.csv")).len(), 5);
}

#[test]
fn invalid_configuration_names_every_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "model.w_h = 1.5\nsolver.grid_resolution = 10\n").unwrap();
    let out = liability(&dir.path().join("o"), &["--config", cfg.to_str().unwrap(), "solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("model.w_h = 1.5"), "{err}");
    assert!(err.contains("solver.grid_resolution"), "{err}");
    assert!(err.lines().any(|l| l.starts_with("liability-error kind=config command=solve")));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = liability(dir.path(), &["--set", "model.gamma=1", "--set", "scenario.q=2", "solve"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("model.gamma") && err.contains("scenario.q"), "{err}");
}

#[test]
fn flags_override_file_and_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "scenario.p = 0.2\n").unwrap();
    let out = liability(
        &dir.path().join("o"),
        &["-q", "--config", cfg.to_str().unwrap(), "--set", "scenario.p=0.3", "solve", "--p", "0.7"],
    );
    assert!(out.status.success());
    let rows = csv(&dir.path().join("o/equilibrium.csv"));
    assert_eq!(rows[1][0], fmt_num(0.7));
}

#[test]
fn solver_failure_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    // alpha = 0.6 puts the sensor pole inside the human care interval
    let out = liability(
        dir.path(),
        &["-q", "sensitivity", "--parameter", "alpha", "--values", "0.4,0.6", "--p-grid", "0.3,0.6"],
    );
    assert_eq!(out.status.code(), Some(3));
    let rows = csv(&dir.path().join("sensitivity.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][0], "FAILED");
    assert_eq!(rows[3].len(), rows[0].len());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("liability-error kind=solver command=sensitivity")));
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let out = liability(&first, &["-q", "--seed", "5", "sweep", "--p-grid", "0.2:0.8:0.3", "--k", "0.7"]);
    assert!(out.status.success());
    let manifest = first.join("run.manifest.txt");
    let second = dir.path().join("b");
    let out = liability(&second, &["-q", "--config", manifest.to_str().unwrap(), "sweep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["sweep.csv", "run.manifest.txt"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn progress_goes_to_stderr_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = liability(dir.path(), &["lawmaker", "--p", "0.5", "--k-grid", "0.5:1.5:0.5"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("[lawmaker]"));
    assert!(!stdout.contains("[lawmaker]"));
    for name in ["k_sweep.csv", "lawmaker_trace.csv", "lawmaker.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn exclusive_lane_sweep_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = liability(dir.path(), &["-q", "sweep", "--lanes", "exclusive", "--p-grid", "0.4,0.6"]);
    assert!(out.status.success());
    let rows = csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows[1][column(&rows, "r_ah")], "0");
    assert_eq!(rows[1][column(&rows, "k_policy")], "exclusive");
}
