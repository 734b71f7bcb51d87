use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-design"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn round_trip(design_args: &[&str], loss_args: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("d");
    let prefix_s = prefix.to_str().unwrap();
    let mut args = design_args.to_vec();
    args.extend(["--out", prefix_s, "--plot"]);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = json(&dir.path().join("d.json"));
    assert_eq!(meta["schema_version"], 1);
    assert!(dir.path().join("d.svg").exists());

    let csv = dir.path().join("d.csv");
    let mut args = vec!["loss", "--design", csv.to_str().unwrap(), "--format", "json"];
    args.extend(loss_args);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again: Value = serde_json::from_slice(&out.stdout).unwrap();
    let (a, b) = (meta["combined"].as_f64().unwrap(), again["combined"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    for key in ["nu", "c", "n", "seed", "strategy", "variance_term", "bias_term", "combined", "scale_note"] {
        assert!(again.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn jitter_round_trip() {
    round_trip(
        &["jitter", "--nu", ".5", "--c", ".5", "--n", "10", "--mode", "stratified", "--seed", "7"],
        &["--strategy", "jitter-stratified", "--nu", ".5", "--c", ".5"],
    );
}

#[test]
fn cluster_round_trip() {
    round_trip(&["cluster1d", "--degree", "2", "--nu", ".5", "--seed", "4"], &["--strategy", "cluster1d", "--degree", "2"]);
}

#[test]
fn ccd2d_round_trip_and_counts() {
    round_trip(&["ccd2d", "--nu", ".5", "--n", "50", "--seed", "3"], &["--strategy", "ccd2d"]);
    let out = run(&["ccd2d", "--nu", ".5", "--n", "50", "--seed", "3", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let counts: Vec<u64> = doc["metadata"]["counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(counts, [7, 7, 7, 7, 5, 5, 5, 5, 2]);
    assert_eq!(doc["points"].as_array().unwrap().len(), 50);
}

#[test]
fn design_csv_layout() {
    let out = run(&["ccdk", "--k", "3", "--seed", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3"));
    assert_eq!(lines.count(), 80);
}

#[test]
fn jitter_reports_both_references() {
    let out = run(&["jitter", "--nu", ".5", "--c", ".5", "--n", "10", "--mode", "stratified", "--seed", "7", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((doc["i_nu_xi"].as_f64().unwrap() - 2.31).abs() < 0.01);
    assert!(doc["reference"]["combined"].as_f64().unwrap() > 2.31);
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sim");
    let out = run(&[
        "simulate", "--strategy", "jitter-stratified", "--reps", "200", "--nu", ".5", "--c", ".5", "--n", "10", "--seed", "1",
        "--out", prefix.to_str().unwrap(), "--plot",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("sim.json"));
    let mean = s["mean"].as_f64().unwrap();
    let reference = s["reference"]["combined"].as_f64().unwrap();
    assert!((mean - reference).abs() / reference < 0.02);
    let reps = std::fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    assert!(reps.starts_with("rep,j_nu,variance_term,gamma\n"));
    assert_eq!(reps.lines().count(), 201);
    let counts: u64 = s["histogram"]["counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(counts, 200);

    let again = run(&["simulate", "--strategy", "jitter-stratified", "--reps", "200", "--nu", ".5", "--c", ".5", "--seed", "1", "--format", "json"]);
    let t: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(t["mean"], s["mean"]);
}

#[test]
fn exit_codes() {
    let overlap = run(&["jitter", "--nu", ".5", "--c", "1", "--n", "10"]);
    assert_eq!(overlap.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&overlap.stderr).contains("bin 1"));
    assert_eq!(run(&["jitter", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["huber", "--nu", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["ccdk", "--k", "3", "--nu", ".95"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, format!("x1\n{}", "0.25\n".repeat(10))).unwrap();
    let singular = run(&["loss", "--design", path.to_str().unwrap(), "--strategy", "jitter-stratified", "--c", ".5"]);
    assert_eq!(singular.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&singular.stderr).contains("singular"));
    assert_eq!(run(&["huber"]).status.code(), Some(0));
}
