use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn foms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_writes_one_row_per_step_plus_start() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = foms(&[
        "solve",
        "--problem",
        "lasso",
        "--n",
        "50",
        "--m",
        "25",
        "--lambda",
        "0.1",
        "--seed",
        "42",
        "--solver",
        "abpgm",
        "--steps",
        "1000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        lines[0],
        "k,objective,gap,step,grad_calls,prox_calls,lo_calls,wall_ns"
    );
    assert_eq!(lines.len(), 1002);
    assert!(text.contains("# seed=42") && text.contains("# generator="));
    assert_eq!(json(&out)["rows"], 1001);
}

#[test]
fn unknown_solver_is_a_usage_error() {
    let out = foms(&["solve", "--problem", "lasso", "--solver", "nosuch"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("bpgm") && err.contains("abpgm") && err.contains("cp"),
        "{err}"
    );
}

#[test]
fn unknown_problem_lists_valid_tags() {
    let out = foms(&["solve", "--problem", "sudoku", "--solver", "bpgm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simplex-qp"));
}

#[test]
fn verify_passes_accelerated_bound() {
    let out = foms(&["verify", "--bound", "abpgm-rate", "--seed", "7"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    for key in ["spec", "solver", "bound", "violations", "slope"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["violations"], 0);
}

#[test]
fn unknown_bound_is_a_usage_error() {
    let out = foms(&["verify", "--bound", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("abpgm-rate"));
}

#[test]
fn rates_fits_stored_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bpgm.csv");
    let p = path.to_str().unwrap();
    let out = foms(&[
        "solve",
        "--problem",
        "simplex-qp",
        "--n",
        "30",
        "--seed",
        "3",
        "--solver",
        "gcg",
        "--steps",
        "500",
        "--out",
        p,
    ]);
    assert!(out.status.success());
    let out = foms(&["rates", p, "--from", "10", "--to", "500"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert!(report["slope"].as_f64().unwrap() < 0.0);
    assert_eq!(report["solver"], "gcg-standard");
    assert_eq!(report["spec"]["problem"], "simplex-qp");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "problem = lasso\nn = 20\nm = 10\nsolver = bpgm\nsteps = 30\nseed = 5\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let out = foms(&["--config", c, "solve"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)["rows"], 31);
    let out = foms(&["--config", c, "solve", "--steps", "12"]);
    assert_eq!(json(&out)["rows"], 13);
}

#[test]
fn compare_shares_one_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_foms"))
        .args([
            "compare",
            "--problem",
            "lasso",
            "--n",
            "30",
            "--m",
            "15",
            "--seed",
            "2",
            "--solvers",
            "bpgm,abpgm,universal,restart",
            "--steps",
            "100",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ])
        .env("FOMS_THREADS", "2")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    let runs = report["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    let reference = report["reference_value"].as_f64().unwrap();
    for run in &runs[..3] {
        assert_eq!(run["reference_value"].as_f64().unwrap(), reference);
    }
    assert!(runs[3]["error"].is_string());
    assert!(dir.path().join("abpgm.csv").exists());
}
