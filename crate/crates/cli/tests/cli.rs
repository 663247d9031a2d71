use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zp_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zp-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("ZP_LAB_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn synth(dir: &Path, delta: &str) {
    let out = zp_lab(
        &["synth", "--p", "2", "--delta", delta, "--out", "sys.json"],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn omega_of_flat_vector() {
    let dir = tempfile::tempdir().unwrap();
    let out = zp_lab(
        &["omega", "--p", "2", "--vec", "1:1;2:1;3:1;4:1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let entries = v["value"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        assert!((e[1].as_f64().unwrap() + std::f64::consts::LN_2).abs() < 1e-15);
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("-6.9314718055994529e-1"));
    assert_eq!(v["passed"], Value::Bool(true));
}

#[test]
fn loglift_singleton() {
    let dir = tempfile::tempdir().unwrap();
    let out = zp_lab(
        &["loglift", "--p", "2", "--n", "4", "--profile", "singleton"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let value = json(&out)["value"].as_f64().unwrap();
    assert!((value - 1.3862943611198906).abs() < 1e-12);
}

#[test]
fn distort_reports_bound_five() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "0.1");
    let out = zp_lab(
        &["distort", "--system", "sys.json", "--eps", "0.1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"]["bound"].as_f64(), Some(5.0));
    assert!(v["value"]["ratio"].as_f64().unwrap() >= 5.0);
}

#[test]
fn lift_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "0.2");
    assert!(zp_lab(
        &["lift", "--system", "sys.json", "--out", "z.json"],
        dir.path()
    )
    .status
    .success());
    let out = zp_lab(&["validate", "--system", "z.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["value"]["space"], "zp");
}

#[test]
fn loglift_sweep_has_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--target", "loglift", "--p", "1.5,2,3", "--n", "2,4,8,16", "--format", "csv",
    ];
    let out = zp_lab(&args, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for (k, row) in rows.iter().enumerate() {
        let p: f64 = row[col("p")].parse().unwrap();
        let n: f64 = row[col("n")].parse().unwrap();
        assert_eq!(
            (p, n as usize),
            ([1.5, 2.0, 3.0][k / 4], [2, 4, 8, 16][k % 4])
        );
        let value: f64 = row[col("value")].parse().unwrap();
        let closed = n.powf(1.0 / p) * n.ln() / p;
        assert!((value - closed).abs() <= 1e-10 * closed);
    }
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["growth", "--p", "2", "--n", "5"];
    let j = json(&zp_lab(&args, dir.path()));
    let c = zp_lab(&[&args[..], &["--format", "csv"]].concat(), dir.path());
    let mut reader = csv::Reader::from_reader(c.stdout.as_slice());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["n", "value", "reference", "law"]
    );
    for (row, rec) in j["rows"].as_array().unwrap().iter().zip(reader.records()) {
        let rec = rec.unwrap();
        assert_eq!(
            row["value"].as_f64().unwrap(),
            rec[1].parse::<f64>().unwrap()
        );
        assert_eq!(
            row["reference"].as_f64().unwrap(),
            rec[2].parse::<f64>().unwrap()
        );
    }
}

#[test]
fn exit_status_for_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        zp_lab(&["sweep", "--target", "loglift", "--n", ""], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zp_lab(&["omega", "--p", "2", "--vec", "0:1"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zp_lab(&["omega", "--p", "1", "--vec", "1:1"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zp_lab(&["validate", "--system", "missing.json"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(zp_lab(&["frobnicate"], d).status.code(), Some(2));
    std::fs::write(d.join("bad.json"), "{\"p\": 2}").unwrap();
    assert_eq!(
        zp_lab(&["validate", "--system", "bad.json"], d)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exit_status_for_failed_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Cross pairing 0.5 exceeds delta = 0.1.
    let system = r#"{"p": 2.0, "delta": 0.1, "space": "ellp", "families": [
        {"A": [{"entries": [[1, 1.0]]}], "Astar": [{"entries": [[1, 1.0], [2, 0.5]]}]},
        {"A": [{"entries": [[2, 1.0]]}], "Astar": [{"entries": [[2, 1.0]]}]}]}"#;
    std::fs::write(d.join("bad.json"), system).unwrap();
    let out = zp_lab(&["validate", "--system", "bad.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
    assert_eq!(
        zp_lab(&["distort", "--system", "bad.json", "--eps", "0.1"], d)
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_zp-lab"));
        cmd.args(args)
            .current_dir(dir.path())
            .env_remove("ZP_LAB_SEED");
        if let Some(s) = env {
            cmd.env("ZP_LAB_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    let base = ["psp", "--p", "2", "--n", "3"];
    let from_env = run(Some("7"), &base);
    assert_eq!(from_env, run(None, &[&base[..], &["--seed", "7"]].concat()));
    assert_ne!(from_env, run(None, &base));
    let v: Value = serde_json::from_slice(&from_env).unwrap();
    assert_eq!(v["seed"], 7);
}

#[test]
fn system_files_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, "0.3");
    let first = std::fs::read_to_string(d.join("sys.json")).unwrap();
    let sys = zp_core::BiorthSystem::from_json(&first).unwrap();
    let again = zp_core::BiorthSystem::from_json(&sys.to_json()).unwrap();
    assert_eq!(sys, again);
}
