use std::path::PathBuf;
use std::process::{Command, Output};

use finsler::report::strip_timestamps;
use serde_json::Value;

fn input(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("inputs").join(name)
}

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn status_code(v: &Value) -> i32 {
    match v["status"].as_str().unwrap() {
        "pass" => 0,
        "fail" => 1,
        _ => 2,
    }
}

#[test]
fn classify_euclidean_passes() {
    let out = finsler(&["classify", "--input", input("euclidean.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(status_code(&v), 0);
    let verdicts = &v["result"]["classification"]["verdicts"];
    for k in ["riemannian", "berwald", "weakly_berwald", "douglas"] {
        assert_eq!(verdicts[k], Value::Bool(true), "{k}");
    }
    assert_eq!(v["seed"], 42);
    assert!(v["tolerances"]["cartan"].as_f64().is_some());
}

#[test]
fn verify_unit_case_passes() {
    let out = finsler(&["verify-theorem2d", "--input", input("case_unit.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let case = &v["result"]["cases"][0];
    assert!(case["cartan_sup_norm"].as_f64().unwrap() <= 1e-8);
    assert_eq!(case["status"], "pass");
}

#[test]
fn malformed_json_is_invalid_input() {
    let out = finsler(&["classify", "--input", input("malformed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    assert_eq!(status_code(&report(&out)), 2);
}

#[test]
fn unknown_key_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"dimension": 1, "F_squared": {"op": "pow", "args": [{"op": "y", "i": 1}], "exponent": 2}, "chart_box": [[0, 1]], "metric": 1}"#).unwrap();
    let out = finsler(&["classify", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key \"metric\""));
}

#[test]
fn contradictory_tolerances_fail_with_status() {
    let out = finsler(&[
        "classify",
        "--input",
        input("randers_x.json").to_str().unwrap(),
        "--tol-cartan",
        "10",
        "--tol-berwald",
        "1e-12",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(status_code(&report(&out)), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("finsler-core/classify"));
}

#[test]
fn unmet_theorem_premise_is_invalid_input() {
    let out = finsler(&["dwp", "--input", input("dwp_exp.json").to_str().unwrap(), "--theorem", "theorem3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis violation"));
}

#[test]
fn dwp_report_lists_every_block() {
    let out = finsler(&["dwp", "--input", input("dwp_exp.json").to_str().unwrap(), "--samples", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let blocks = v["result"]["block_formulas"].as_object().unwrap();
    assert_eq!(blocks.keys().filter(|k| k.starts_with("berwald/")).count(), 8);
    assert_eq!(blocks.keys().filter(|k| k.starts_with("spray/")).count(), 2);
    assert_eq!(v["samples"]["total"], 8);
}

#[test]
fn tensors_at_explicit_point() {
    let out = finsler(&["tensors", "--input", input("randers.json").to_str().unwrap(), "--x", "0,0", "--y", "1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    let g = &v["result"]["tensors"][0];
    assert_eq!(g["name"], "g");
    let comps: Vec<f64> = g["components"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
    assert!((comps[0] - 2.25).abs() < 1e-12 && (comps[3] - 1.5).abs() < 1e-12);
    let bad = finsler(&["tensors", "--input", input("randers.json").to_str().unwrap(), "--x", "0", "--y", "1,0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = finsler(&["classify", "--input", input("quartic.json").to_str().unwrap(), "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["classification"]["verdicts"]["berwald"], true);
    assert_eq!(v["result"]["classification"]["verdicts"]["riemannian"], false);
}

#[test]
fn probe_emits_json_lines() {
    let out = finsler(&["probe-n3", "--budget", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[9]["kind"], "summary");
}

#[test]
fn repeated_runs_match_modulo_timestamp() {
    let args = ["classify", "--input", input("randers_x.json").to_str().unwrap().to_owned().leak(), "--seed", "7"];
    let mut a = report(&finsler(&args));
    let mut b = report(&finsler(&args));
    strip_timestamps(&mut a);
    strip_timestamps(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
