//! End-to-end runs of the command-line tool.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sstroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_solution_history_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let instance = fixture("scenario_I.json");
    let o = run(&[
        "solve",
        instance.to_str().unwrap(),
        "--max-iter",
        "30",
        "--gap",
        "5",
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let solution = read_json(&dir.path().join("solution.json"));
    assert_eq!(solution["unserved"].as_array().unwrap().len(), 0);
    let history = read_json(&dir.path().join("history.json"));
    assert!(!history["iterations"].as_array().unwrap().is_empty());
    let csv = std::fs::read_to_string(dir.path().join("trajectory_v1.csv")).unwrap();
    assert!(csv.starts_with("time,node,state,cost,cumulative\n"));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["config"]["Solve"]["max_iter"], 30);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn reduce_reports_the_single_forbidden_pair() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fixture("distant_origins.json");
    let o = run(&[
        "reduce",
        instance.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let report = read_json(&dir.path().join("reduction.json"));
    let pairs = report["forbidden_pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0]["passengers"], serde_json::json!([1, 2]));
    assert_eq!(pairs[0]["rule"], "insufficient_travel");
    assert!(String::from_utf8_lossy(&o.stdout).contains("p1 + p2"));
}

#[test]
fn oracle_refuses_instances_beyond_its_guard() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("big.json");
    let o = run(&[
        "gen",
        "random",
        "--passengers",
        "20",
        "--output",
        instance.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "oracle",
        instance.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("too large for the exhaustive oracle"));
}

#[test]
fn oracle_confirms_bounds_on_a_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fixture("scenario_VI.json");
    let o = run(&[
        "oracle",
        instance.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let doc = read_json(&dir.path().join("oracle.json"));
    assert_eq!(doc["sandwiched"], true);
}

#[test]
fn dp_prints_the_forced_shared_ride() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fixture("shared_ride.json");
    let o = run(&[
        "dp",
        instance.to_str().unwrap(),
        "--vehicle",
        "1",
        "--force-all",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().last().unwrap().ends_with(",6.52"), "{stdout}");
}

#[test]
fn convert_builds_a_complete_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("converted.json");
    let input = fixture("euclidean_3.json");
    let o = run(&[
        "convert",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&output);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 7);
    assert_eq!(doc["links"].as_array().unwrap().len(), 42);
    assert!(dir.path().join("manifest.json").exists());

    let o = run(&[
        "convert",
        input.to_str().unwrap(),
        "--speed",
        "0",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

#[test]
fn invalid_input_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("shared_ride.json"))
        .unwrap()
        .replacen(
            "\"pickup_window\": [\n        4,\n        5\n      ]",
            "\"pickup_window\": [\n        5,\n        4\n      ]",
            1,
        );
    std::fs::write(&bad, text).unwrap();
    let o = run(&[
        "solve",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("passenger 1"));

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
