use std::path::Path;
use std::process::{Command, Output};

fn convexinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexinfo"))
        .args(args)
        .env_remove("CONVEXINFO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bounds_varentropy_row() {
    let o = convexinfo(&["bounds", "n=2", "beta=6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("varentropy_bound,,3.69\n"));
}

#[test]
fn bounds_upper_exponent() {
    let o = convexinfo(&["bounds", "n=1", "beta=2", "t=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("upper_exponent,2,0.30685281944\n"));
}

#[test]
fn invalid_parameters_exit_two() {
    let o = convexinfo(&["bounds", "n=2", "beta=1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta must exceed n"));
    assert_eq!(convexinfo(&["bounds", "n=2", "oops"]).status.code(), Some(2));
    assert_eq!(
        convexinfo(&["bounds", "n=2", "beta=6", "zeta=1"]).status.code(),
        Some(2)
    );
    assert_eq!(convexinfo(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn dual_json() {
    let o = convexinfo(&["dual", "n=1", "beta=2", "t=1,3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "dual");
    assert_eq!(v["exponents"].as_array().unwrap().len(), 4);
    assert_eq!(v["exponents"][3]["value"], "infinite");
}

#[test]
fn verify_moments_pass_and_injected_failure() {
    let ok = convexinfo(&["verify-moments", "family=homogeneous", "n=1", "s=1", "norm_q=1"]);
    assert_eq!(ok.status.code(), Some(0));
    let csv = stdout(&ok);
    assert!(csv.starts_with("p,logM,second_difference\n"));
    // logM = ln 2 at every grid point
    for line in csv.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-9, "{line}");
    }
    let bad = convexinfo(&[
        "verify-moments",
        "family=homogeneous",
        "n=1",
        "s=1",
        "norm_q=1",
        "inject=convex",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_moments_student_is_strict() {
    let o = convexinfo(&["verify-moments", "family=student", "n=1", "beta=5", "format=json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["strictly_concave"], true);
}

fn simulate_json(dir: &Path, workers: &str) -> String {
    let path = dir.join("sim.json");
    let out = format!("out={}", path.display());
    let o = convexinfo(&[
        "simulate",
        "family=pareto",
        "n=1",
        "beta=2",
        "count=200000",
        "seed=42",
        &out,
        "--workers",
        workers,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_is_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let one = simulate_json(dir.path(), "1");
    assert_eq!(one, simulate_json(dir.path(), "4"));
    assert_eq!(one, simulate_json(dir.path(), "8"));
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["all_pass"], true);
    assert!(!v["config"].as_str().unwrap().contains("workers"));
}

#[test]
fn config_file_wins_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# varentropy example\nbeta=6\n").unwrap();
    let o = convexinfo(&["bounds", "n=2", "beta=9", "--config", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: config file overrides beta=9 with beta=6"));
    assert!(stdout(&o).contains("varentropy_bound,,3.69\n"));
}

#[test]
fn missing_config_file_is_input_error() {
    let o = convexinfo(&["bounds", "n=2", "beta=6", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_convexinfo"))
        .args(["dual", "n=2", "beta=6", "format=json"])
        .env("CONVEXINFO_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("dual.json")).unwrap();
    assert!(text.contains("\"mean_slope\""));
}
