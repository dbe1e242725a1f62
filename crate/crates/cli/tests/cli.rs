//! End-to-end checks of the `llmoea` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn llmoea(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llmoea"))
        .args(args)
        .current_dir(dir)
        .env_remove("LLM_API_KEY")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_the_four_output_files() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead",
            "--problem",
            "zdt1",
            "--evals",
            "2000",
            "--pop",
            "50",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in [
        "population.csv",
        "archive.csv",
        "trajectory.csv",
        "summary.txt",
    ] {
        assert!(tmp.path().join("r").join(f).is_file(), "{f}");
    }
    let summary = fs::read_to_string(tmp.path().join("r/summary.txt")).unwrap();
    assert!(summary.contains("problem=zdt1"));
    assert!(summary.contains("population_size=50"));
    let pop = fs::read_to_string(tmp.path().join("r/population.csv")).unwrap();
    assert!(pop.starts_with("f1,f2\n"));
    assert_eq!(pop.lines().count(), 51);
}

#[test]
fn with_x_adds_decision_columns() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "nsga2",
            "--problem",
            "zdt2",
            "--evals",
            "1000",
            "--pop",
            "20",
            "--with-x",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pop = fs::read_to_string(tmp.path().join("r/population.csv")).unwrap();
    let header = pop.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 2 + 30);
    assert!(header.ends_with(",x30"));
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(tmp.path(), &["run", "--problem", "zdt9"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("zdt1"));
}

#[test]
fn unknown_algorithm_and_bad_setting_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &["run", "--algo", "moead-xyz", "--problem", "zdt1"],
    );
    assert_eq!(code(&out), 2);
    let out = llmoea(tmp.path(), &["run", "--problem", "zdt1", "--set", "T=abc"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn live_backend_without_token_fails_as_configuration() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead-llm",
            "--problem",
            "re21",
            "--backend",
            "live",
            "--evals",
            "100",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("LLM_API_KEY"));
}

#[test]
fn llm_run_needs_a_backend() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead-llm",
            "--problem",
            "re21",
            "--evals",
            "100",
        ],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn scripted_llm_run_logs_and_fits() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead-llm",
            "--problem",
            "re21",
            "--backend",
            "scripted:centroid",
            "--evals",
            "300",
            "--pop",
            "20",
            "--set",
            "T=5",
            "--log",
            "log.jsonl",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let log = fs::read_to_string(tmp.path().join("log.jsonl")).unwrap();
    assert!(log.lines().count() > 50);
    let summary = fs::read_to_string(tmp.path().join("r/summary.txt")).unwrap();
    assert!(summary.contains("hv_mode=scaled"));

    let out = llmoea(tmp.path(), &["fit", "log.jsonl", "--out", "op.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let op = fs::read_to_string(tmp.path().join("op.txt")).unwrap();
    for key in ["a=", "b=", "c=", "d=", "theta=", "l="] {
        assert!(op.lines().any(|l| l.starts_with(key)), "{key}");
    }
    assert!(tmp.path().join("op.txt.report.txt").is_file());

    // the fitted operator drives a regular run
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead-lo",
            "--lo-file",
            "op.txt",
            "--problem",
            "zdt1",
            "--evals",
            "1000",
            "--pop",
            "20",
            "--out",
            "r2",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn fit_without_records_fails() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.jsonl"), "").unwrap();
    let out = llmoea(tmp.path(), &["fit", "empty.jsonl", "--out", "op.txt"]);
    assert_eq!(code(&out), 1);
    assert!(!tmp.path().join("op.txt").exists());
}

#[test]
fn indicators_of_the_true_front() {
    let tmp = TempDir::new().unwrap();
    let front: String = std::iter::once("f1,f2".to_string())
        .chain((0..=1000).map(|i| {
            let f1 = i as f64 / 1000.0;
            format!("{f1},{}", 1.0 - f1.sqrt())
        }))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(tmp.path().join("front.csv"), front).unwrap();
    let out = llmoea(
        tmp.path(),
        &["indicators", "front.csv", "--problem", "zdt1"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    let hv: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("hv (normalized): "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((hv - 0.7245).abs() < 2e-3, "{hv}");
}

#[test]
fn indicators_reject_empty_and_mismatched_fronts() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.csv"), "").unwrap();
    fs::write(tmp.path().join("two.csv"), "f1,f2\n0.5,0.5\n").unwrap();
    let out = llmoea(
        tmp.path(),
        &["indicators", "empty.csv", "--problem", "zdt1"],
    );
    assert_eq!(code(&out), 2);
    let out = llmoea(tmp.path(), &["indicators", "two.csv", "--problem", "uf8"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn experiment_writes_tables() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("plan.txt"),
        "name = tiny\nalgorithms = A:moead, B:moead-lo\nproblems = zdt1\nseeds = 0..3\nN_max = 1000\nN = 20\n",
    )
    .unwrap();
    let out = llmoea(tmp.path(), &["experiment", "plan.txt", "--out", "ex"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in [
        "cells.csv",
        "timing.csv",
        "hv_table.csv",
        "hv_table.txt",
        "igd_table.csv",
        "igd_table.txt",
    ] {
        assert!(tmp.path().join("ex").join(f).is_file(), "{f}");
    }
    let cells = fs::read_to_string(tmp.path().join("ex/cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 2 * 3);
    assert!(tmp
        .path()
        .join("ex/runs/B/zdt1/seed2/summary.txt")
        .is_file());
}

#[test]
fn empty_plan_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("plan.txt"), "").unwrap();
    let out = llmoea(tmp.path(), &["experiment", "plan.txt"]);
    assert_eq!(code(&out), 2);
    let out = llmoea(tmp.path(), &["experiment", "--preset", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn plotdata_kinds_and_missing_inputs() {
    let tmp = TempDir::new().unwrap();
    let out = llmoea(
        tmp.path(),
        &[
            "run",
            "--algo",
            "moead",
            "--problem",
            "zdt1",
            "--evals",
            "1000",
            "--pop",
            "20",
            "--out",
            "r",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = llmoea(tmp.path(), &["plotdata", "--kind", "convergence", "r"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("algo,seed,evals,hv\n"));
    assert!(text.lines().count() > 2);

    let out = llmoea(
        tmp.path(),
        &["plotdata", "--kind", "front", "r", "--out", "front.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let front = fs::read_to_string(tmp.path().join("front.csv")).unwrap();
    assert!(front.starts_with("algo,f1,f2\n"));

    let out = llmoea(tmp.path(), &["plotdata", "--kind", "scatter", "r"]);
    assert_eq!(code(&out), 2);
    let out = llmoea(tmp.path(), &["plotdata", "--kind", "front", "missing"]);
    assert_eq!(code(&out), 1);
}
