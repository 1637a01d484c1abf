use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn geolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geolab"))
        .args(args)
        .output()
        .expect("spawn geolab")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn period_table_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("periods.csv");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"command": "period-table", "profile": "product", "c_list": [0.5, 0.1, 0.02],
                "outputs": {{"csv_path": {:?}}}}}"#,
            csv.to_str().unwrap()
        ),
    );
    let out = geolab(&["--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&csv);
    assert_eq!(rows[0][3], "bound");
    assert_eq!(rows.len(), 4);
    for (row, c) in rows[1..].iter().zip([0.5f64, 0.1, 0.02]) {
        let measured: f64 = row[2].parse().unwrap();
        let bound: f64 = row[3].parse().unwrap();
        assert_eq!(
            bound,
            2.0 * std::f64::consts::PI * (2.0 * c / (1.0 + c)).sqrt()
        );
        assert!(measured < bound);
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let out = geolab(&[
            "shoot",
            "--r0",
            "0.3",
            "--out-csv",
            csv.to_str().unwrap(),
            "--out-json",
            json.to_str().unwrap(),
            "--out-svg",
            svg.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(csv).unwrap(),
            std::fs::read(json).unwrap(),
            std::fs::read_to_string(svg).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    let strip = |s: &str| -> String { s.lines().filter(|l| !l.starts_with("<!--")).collect() };
    assert_eq!(strip(&a.2), strip(&b.2));
    let v: Value = serde_json::from_slice(&a.1).unwrap();
    assert_eq!(v["certificates"]["barrier_ok"], Value::Bool(true));
    assert!(v["crossing"]["alpha"].as_f64().unwrap() < 0.0);
}

#[test]
fn oracle_c1_reports_small_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("oracle.json");
    let out = geolab(&[
        "oracle-c1",
        "--kappa",
        "0.7853981",
        "--out-json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(v["sup_error"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn ricci_check_on_product() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ricci.csv");
    let out = geolab(&["ricci-check", "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 1001);
    for row in &rows[1..] {
        let v: Vec<f64> = row[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert_eq!(v, vec![0.0, 1.0, 1.0]);
    }
}

#[test]
fn trace_writes_trajectory_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let json = dir.path().join("trace.json");
    let out = geolab(&[
        "trace",
        "--c",
        "0.3",
        "--out-csv",
        csv.to_str().unwrap(),
        "--out-json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&csv);
    assert_eq!(rows[0], ["t", "r", "phi", "rdot", "phidot", "clairaut_c"]);
    for row in &rows[1..] {
        let c: f64 = row[5].parse().unwrap();
        assert!((c - 0.3).abs() < 1e-8);
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(v["events"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["kind"] == "equator_crossing"));
}

#[test]
fn non_compliant_profile_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"command": "validate-profile", "profile": {"kind": "smooth", "eta": -0.2, "r_flat": 1.0}}"#,
    );
    let out = geolab(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(geolab(&["shoot"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "broken.json", r#"{"command": "trace", "#);
    assert_eq!(geolab(&["--config", &cfg]).status.code(), Some(1));
    assert_eq!(geolab(&["trace", "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(
        geolab(&["shoot", "--r0", "0.3", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn find_double_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("double.csv");
    let cfg = write_config(
        dir.path(),
        "double.json",
        &format!(
            r#"{{"command": "find-double", "epsilon": 0.3, "n_targets": 2, "r0_bracket": [0.005, 0.3],
                "outputs": {{"csv_path": {:?}}}}}"#,
            csv.to_str().unwrap()
        ),
    );
    let out = geolab(&["--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 3);
    let k: Vec<usize> = rows[1..].iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(k[1] > k[0]);
}

#[test]
fn accept_passes() {
    let out = geolab(&["accept"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("[PASS]").count(), 11, "{text}");
    assert_eq!(out.status.code(), Some(0));
}
