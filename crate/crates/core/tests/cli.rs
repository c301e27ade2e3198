//! End-to-end checks of the `abls` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abls")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("grid.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_GRID: &str = r#"{
    "problem": "logistic",
    "n": 80,
    "d": 6,
    "seed": 3,
    "methods": ["gd"],
    "rho_regular": [0.5],
    "alpha0_multipliers": [10.0, 100.0],
    "precision": 1e-6,
    "max_iterations": 2000,
    "workers": 1
}"#;

#[test]
fn run_writes_traces_summary_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_GRID);
    let out = dir.path().join("out");
    let o = abls(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("gd-regular-rho0.5"), "{text}");
    assert!(text.contains("gd-adaptive-rho0.3"), "{text}");
    let traces: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv") && n != "summary.csv")
        .collect();
    assert_eq!(traces.len(), 4);
    assert!(out.join("summary.csv").exists());
    assert!(out.join("config.json").exists());

    let compared = abls(&["compare", out.to_str().unwrap(), "--metric", "gradevals"]);
    assert!(compared.status.success());
    assert!(stdout(&compared).contains("gain metric: gradevals"));
}

#[test]
fn compare_strict_reports_missed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SMALL_GRID.replace("\"max_iterations\": 2000", "\"max_iterations\": 2"));
    let out = dir.path().join("out");
    let o = abls(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--strict"]);
    assert_eq!(o.status.code(), Some(3));
    let lax = abls(&["compare", out.to_str().unwrap()]);
    assert!(lax.status.success());
    assert!(stdout(&lax).contains("no*"));
    let strict = abls(&["compare", out.to_str().unwrap(), "--strict"]);
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn bad_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"problem": "logistic", "no_such_key": 1}"#);
    let o = abls(&["run", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let config = write_config(dir.path(), r#"{"problem": "logistic", "rho_regular": [1.5]}"#);
    let o = abls(&["run", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gradcheck_passes_for_every_problem() {
    for problem in ["logistic", "lasso", "rosenbrock", "matrix-factorization"] {
        let o = abls(&["gradcheck", "--problem", problem, "--points", "10"]);
        assert!(o.status.success(), "{problem}: {}", stdout(&o));
        assert!(stdout(&o).contains("PASS"));
    }
}

#[test]
fn replicate_examples_all_pass() {
    let o = abls(&["replicate-examples"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7, "{text}");
    assert!(!text.contains("FAIL"));
}
