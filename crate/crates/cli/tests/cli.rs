use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gramian-bounds"))
        .args(args)
        .env_remove("GRAMIAN_BOUNDS_PRECISION")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn num(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

fn write_system(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn reproduce_prints_four_lines() {
    let out = run(&["reproduce"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("1.0206e-37") && text.contains("1.5717e-4"));
    assert!(text.contains("inconsistent"));
}

#[test]
fn capacity_of_unit_interval() {
    let out = run(&["capacity", "--region", "interval:0,1", "--n-max", "12"]);
    assert!(out.status.success());
    assert!((num(&json_of(&out)["value"]) - 0.25).abs() < 1e-12);
}

#[test]
fn err_on_disk() {
    let out = run(&["err", "--region", "disk:0,0,0.5", "--l", "10"]);
    assert!(out.status.success());
    let e = num(&json_of(&out)["result"]["error"]);
    assert!((e - 0.5f64.powi(10)).abs() < 1e-12, "{e}");
}

#[test]
fn defective_system_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let shift = r#"{"n":3,"k":1,"A":[[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[1,0],[0,0]],"B":[[1,0],[0,0],[0,0]]}"#;
    let path = write_system(dir.path(), "shift.json", shift);
    let out = run(&["verify-thm1", "--system", &path, "--region", "disk:0,0,0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "Defective");
}

#[test]
fn gramian_of_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_system(dir.path(), "scalar.json", r#"{"n":1,"k":1,"A":[[0.5,0]],"B":[[1,0]]}"#);
    let out = run(&["gramian", "--system", &path, "--t", "1"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!((v["report"]["lambda_min"].as_str().unwrap().parse::<f64>().unwrap() - 1.25).abs() < 1e-15);
    let csv = run(&["gramian", "--system", &path, "--t", "3", "--series", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("t,lambda_min"));
}

#[test]
fn verify_batches_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (p, jobs) in [(&a, "1"), (&b, "2")] {
        let out = run(&[
            "verify-thm1", "--region", "disk:0,0,0.8", "--n", "6", "--k", "2", "--cond", "10", "--trials", "3", "--seed", "5",
            "--format", "csv", "--jobs", jobs, "--out", p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    let sidecar: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["all_hold"], true);
}

#[test]
fn verify_thm2_generated() {
    let out = run(&["verify-thm2", "--q", "2", "--n", "12", "--m", "8", "--trials", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    let out = run(&["verify-thm2", "--q", "2", "--n", "12", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "HypothesisViolated");
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gramian-bounds"))
        .args(["--print-config", "reproduce"])
        .env("GRAMIAN_BOUNDS_PRECISION", "212")
        .output()
        .unwrap();
    let cfg: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["global"]["precision_bits"], 212);
    let out = run(&["gramian", "--system", "x", "--t", "1", "--precision-bits", "7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn conjecture_csv() {
    let out = run(&["conjecture", "--n", "4", "--multipliers", "0.1,2", "--trials", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("4,2,0.1,0.0000000000000000e0"));
}

#[test]
fn bad_region_is_a_usage_error() {
    let out = run(&["capacity", "--region", "blob:1"]);
    assert!(!out.status.success());
}
