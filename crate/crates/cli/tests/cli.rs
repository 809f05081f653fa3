use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfb"))
        .args(args)
        .env("GFB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, cmd: &str, config: &str) -> (Output, Value) {
    let cfg = dir.join(format!("{cmd}.cfg.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let o = gfb(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = fs::read_to_string(out.join(format!("{cmd}.json")))
        .map(|s| serde_json::from_str(&s).unwrap())
        .unwrap_or(Value::Null);
    (o, report)
}

#[test]
fn catalog_lists_entries() {
    let o = gfb(&["catalog"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 5);

    let o = gfb(&["catalog", "--id", "flat_so2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["g_dim"], 1);
    assert_eq!(v["n"], 2);
    assert!(v["domain"]["lower"].is_array());

    let o = gfb(&["catalog", "--id", "klein_bottle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("klein_bottle"));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (o, rep) = run_config(
        dir.path(),
        "validate",
        r#"{"example": "twisted_torus", "validate": {"tol": 1e-5}}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rep["result"]["cartan"]["pass"], true);
    for key in ["config_hash", "seed", "h", "tolerances", "timestamp"] {
        assert!(!rep[key].is_null(), "{key}");
    }

    let (o, _) = run_config(dir.path(), "validate", r#"{"example": "flat_so2_corrupted"}"#);
    assert_eq!(o.status.code(), Some(1));

    let (o, _) = run_config(dir.path(), "validate", r#"{"example": "flat_so2", "h": -1}"#);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config(
        dir.path(),
        "validate",
        r#"{"example": "flat_so2", "params": {"bogus": 1}}"#,
    );
    assert_eq!(o.status.code(), Some(2));
    let o = gfb(&["validate", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_reports_periods_and_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "example": "twisted_torus",
        "flow": {
            "points": [[0, 0, 1], [0.8, -0.3, 1]],
            "T": 15.0,
            "steps": 1500,
            "paths": [{"p0": [0.2, 0.3, 1.0], "segments": [{"duration": 2.0, "xi": [0.0]}]}]
        }
    }"#;
    let (o, rep) = run_config(dir.path(), "flow", cfg);
    assert!(o.status.success());
    let r = rep["result"]["period_ratios"][1].as_f64().unwrap();
    assert!((r - 2.0).abs() < 1e-3);
    assert_eq!(
        rep["result"]["paths"][0]["endpoint"],
        serde_json::json!([0.2, 0.3, 1.0])
    );
    let csv = fs::read_to_string(dir.path().join("out/orbit_1.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,x3\n"));

    // leaving the box is a diagnostic, not a failure
    let cfg = r#"{"example": "twisted_torus", "flow": {"points": [[1.5, 1.47, 0]], "T": 13.0, "steps": 1300}}"#;
    let (o, rep) = run_config(dir.path(), "flow", cfg);
    assert!(o.status.success());
    assert!(rep["result"]["orbits"][0]["left_domain"].is_f64());
}

#[test]
fn curvature_grid_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run_config(
        dir.path(),
        "curvature",
        r#"{"example": "sphere_so3", "curvature": {"samples": 5}}"#,
    );
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("out/curvature.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "scal").unwrap();
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|s| (s - 2.0).abs() < 5e-3));

    let (o, _) = run_config(
        dir.path(),
        "curvature",
        r#"{"example": "flat_so2", "curvature": {"samples": 3, "eta": [[1, 0], [0, 2]]}}"#,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn isotropy_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        r#"{"example": "spin4_mod_z2", "isotropy": {"points": [[0,0,0,0,0,0,0,0,0,0], [0,0,0,0,0,0,0.5,0,0,0]]}}"#;
    let (o, rep) = run_config(dir.path(), "isotropy", cfg);
    assert!(o.status.success());
    let f = &rep["result"]["findings"];
    assert_eq!(f[0]["order_estimate"], 2);
    assert_eq!(f[1]["order_estimate"], 1);
    assert_eq!(rep["result"]["orbit_type_vs_first"][1], "greater");

    let (o, _) = run_config(dir.path(), "isotropy", r#"{"example": "sphere_so3"}"#);
    assert_eq!(o.status.code(), Some(2));
}
