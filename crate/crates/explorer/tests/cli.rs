use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn trio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trio")).args(args).output().expect("spawn trio")
}

fn stdout(args: &[&str]) -> String {
    let out = trio(args);
    assert!(out.status.success(), "trio {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn modes_header_and_rows() {
    let s = stdout(&["modes"]);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("mode,omega,omega_sq,kappa,damping,free,f1,f2,f3"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn off_manifold_phase_diagram_is_a_usage_error() {
    let out = trio(&["phase-diagram", "--omega", "1.2,1,1.5", "--lambda", "0.4", "--axis", "r:0:1:3", "--axis", "T:0:1:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_config_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"omega": [1, 2, 3], "no_such_field": 1}"#).unwrap();
    assert_eq!(trio(&["modes", "--config", path(&cfg)]).status.code(), Some(2));
    assert_eq!(trio(&["modes", "--omega", "1,2"]).status.code(), Some(2));
    assert_eq!(trio(&["decay-map", "--axis", "omega1:2:1:5"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_1() {
    let out = trio(&["modes", "--config", "/nonexistent/trio.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"omega": [1.2, 1.0, 1.2], "couplings": [0.3, 0.0, 0.3]}"#).unwrap();
    let from_cfg = stdout(&["modes", "--config", path(&cfg)]);
    let overridden = stdout(&["modes", "--config", path(&cfg), "--omega", "1.3,1,1.3", "--lambda", "0.4"]);
    assert_eq!(overridden, stdout(&["modes"]));
    assert_ne!(from_cfg, overridden);
}

#[test]
fn manifest_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("map.csv");
    let args = ["decay-map", "--axis", "omega1:1:2:9", "--axis", "omega3:1:2:7", "-o", path(&first)];
    assert!(trio(&args).status.success());
    let manifest_path = dir.path().join("map.csv.manifest.json");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "decay-map");
    assert_eq!(manifest["grid"], serde_json::json!([9, 7]));
    assert_eq!(manifest["rows"], 63);
    for name in ["diagonal", "hyperbola"] {
        assert!(dir.path().join(format!("map.{name}.csv")).exists());
    }

    let second = dir.path().join("again.csv");
    assert!(trio(&["decay-map", "--config", path(&manifest_path), "-o", path(&second)]).status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["sync-map", "--axis", "omega1:1.1:1.5:4", "--axis", "omega3:1.1:1.5:3", "--t-max", "300"];
    let one = stdout(&[&base[..], &["--threads", "1"]].concat());
    let four = stdout(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
    assert_eq!(one.lines().next(), Some("omega1,omega3,t_eval,c_abs,defined"));
}

#[test]
fn json_output_matches_csv() {
    let args = ["series", "--t-end", "2", "--dt", "0.5", "--observables", "q1,en13"];
    let csv = stdout(&args);
    let json: Value = serde_json::from_str(&stdout(&[&args[..], &["--format", "json"]].concat())).unwrap();
    assert_eq!(json["columns"], serde_json::json!(["t", "q1", "en13"]));
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let first_csv: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let first_json: Vec<f64> = rows[0].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(first_csv, first_json);
}

#[test]
fn json_decay_map_carries_overlays() {
    let s = stdout(&["decay-map", "--axis", "omega1:1:2:5", "--axis", "omega3:1:2:5", "--format", "json"]);
    let v: Value = serde_json::from_str(&s).unwrap();
    assert!(v["overlays"]["diagonal"]["rows"].as_array().is_some_and(|r| !r.is_empty()));
    assert!(v["overlays"]["hyperbola"].is_object());
}
