use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nahm_forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nahm-forge"))
        .args(args)
        .env_remove("NAHM_FORGE_THREADS")
        .output()
        .expect("spawn nahm-forge")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = nahm_forge(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (out.status.code().unwrap(), v)
}

#[test]
fn verify_identities_passes() {
    let (code, v) = json(&["verify-identities", "--max-n", "8"]);
    assert_eq!(code, 0);
    assert_eq!(v["runs"].as_array().unwrap().len(), 8);
    assert_eq!(v["pass"], true);
}

#[test]
fn zero_max_n_is_usage_error() {
    let out = nahm_forge(&["verify-identities", "--max-n", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_family_and_flag() {
    assert_eq!(nahm_forge(&["closed-form", "--family", "7+1"]).status.code(), Some(1));
    assert_eq!(nahm_forge(&["closed-form", "--bogus"]).status.code(), Some(1));
    assert_eq!(nahm_forge(&["--help"]).status.code(), Some(0));
}

#[test]
fn closed_form_three_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("sol.json");
    let (code, v) = json(&["closed-form", "--family", "3+1", "--out", rec.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(v["nahm_residual"].as_f64().unwrap() < 1e-10);
    for p in v["poles"].as_array().unwrap() {
        assert_eq!(p["representation"], "{2:2}");
    }
    assert!(rec.exists());
}

#[test]
fn closed_form_chain_representations() {
    let (code, v) = json(&["closed-form", "--family", "5+3"]);
    assert_eq!(code, 0);
    let reps: Vec<&str> = v["poles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["representation"].as_str().unwrap())
        .collect();
    assert_eq!(reps, ["{2:4}", "{4:2}"]);
}

fn endpoints(v: &Value) -> Vec<(String, f64, Option<String>)> {
    v["endpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["kind"].as_str().unwrap().to_string(),
                e["t"].as_f64().unwrap(),
                e["representation"].as_str().map(String::from),
            )
        })
        .collect()
}

#[test]
fn flow_from_closed_form_finds_both_poles() {
    let (code, v) = json(&["flow", "--seed", "closed-form", "--family", "3+1", "--t-seed", "0.2"]);
    assert_eq!(code, 0);
    let ends = endpoints(&v);
    assert_eq!(ends[0].0, "pole");
    assert_eq!(ends[1].0, "pole");
    assert!((ends[0].1 + 1.0).abs() < 1e-6);
    assert!((ends[1].1 - 1.0).abs() < 1e-6);
    assert_eq!(ends[0].2.as_deref(), Some("{2:2}"));
    assert!(v["conserved_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn commuting_seed_is_constant() {
    let (code, v) = json(&["flow", "--seed", "commuting", "--lo", "-3", "--hi", "3"]);
    assert_eq!(code, 0);
    let ends = endpoints(&v);
    assert_eq!(ends[0], ("regular".into(), -3.0, None));
    assert_eq!(ends[1], ("regular".into(), 3.0, None));
    assert_eq!(v["nahm_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn axial_seed_with_zero_k_has_pole_at_c() {
    let (code, v) = json(&["flow", "--seed", "axial", "--axial-k", "0", "--axial-c", "-0.4"]);
    assert_eq!(code, 0);
    let ends = endpoints(&v);
    assert_eq!(ends[0].0, "pole");
    assert!((ends[0].1 + 0.4).abs() < 1e-6);
    assert_eq!(ends[1].0, "regular");
}

#[test]
fn seed_file_without_path_is_usage_error() {
    assert_eq!(nahm_forge(&["flow", "--seed", "file"]).status.code(), Some(1));
}

fn header(path: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn transform_small_grid_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let (code, v) = json(&[
        "transform", "--family", "3+1", "--points", "6", "--r-min", "0.5", "--r-max", "2",
        "--csv", a.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{v}");
    assert!(v["max_rel_err"].as_f64().unwrap() < 1e-6);
    assert_eq!(
        header(&a),
        ["r", "eig_1", "eig_2", "eig_3", "eig_4", "normsq", "energy", "ref_F", "ref_G", "rel_err"]
    );
    assert_eq!(csv::Reader::from_path(&a).unwrap().records().count(), 6);
}

#[test]
fn transform_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["transform", "--family", "4+2", "--points", "5", "--r-min", "0.3", "--r-max", "3"];
    let mut one = base.to_vec();
    one.extend(["--threads", "1", "--csv", a.to_str().unwrap()]);
    let mut two = base.to_vec();
    two.extend(["--threads", "3", "--csv", b.to_str().unwrap()]);
    assert_eq!(nahm_forge(&one).status.code(), Some(0));
    assert_eq!(nahm_forge(&two).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_values_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"family": "5+3+1", "max_n": 3, "points": 21}"#).unwrap();
    let c = cfg.to_str().unwrap();

    let (_, v) = json(&["--config", c, "verify-identities"]);
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    let (_, v) = json(&["--config", c, "verify-identities", "--max-n", "2"]);
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);

    let (_, v) = json(&["--config", c, "closed-form"]);
    assert_eq!(v["family"], "5+3+1");
    let (_, v) = json(&["--config", c, "closed-form", "--family", "3+1"]);
    assert_eq!(v["family"], "3+1");
}

#[test]
fn bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"famly": "3+1"}"#).unwrap();
    let out = nahm_forge(&["--config", cfg.to_str().unwrap(), "closed-form"]);
    assert_eq!(out.status.code(), Some(1));
    let out = nahm_forge(&["--config", "/nonexistent/run.json", "closed-form"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_thread_env_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_nahm-forge"))
        .args(["transform", "--points", "2"])
        .env("NAHM_FORGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
