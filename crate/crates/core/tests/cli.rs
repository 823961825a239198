use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn entroinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroinv"))
        .args(args)
        .env_remove("ENTROINV_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(text: &[u8]) -> serde_json::Value {
    serde_json::from_slice(text).expect("valid JSON")
}

const SYMMETRIC: &str = r#"{"A": [[1, 1]], "y": [1], "box": {"lower": [0, 0], "upper": [1, 1]}}"#;

#[test]
fn solve_symmetric_demo() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "p.json", SYMMETRIC);
    let out = dir.path().join("r.json");
    let o = entroinv(&["solve", &problem, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&std::fs::read(&out).unwrap());
    assert_eq!(r["status"], "Converged");
    assert_eq!(r["xi"][0].as_f64(), Some(0.5));
    assert_eq!(r["xi"][1].as_f64(), Some(0.5));
    for key in ["lambda", "psi", "dual", "gap", "residual_inf", "iterations"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let infeasible = write(&dir, "bad.json", &SYMMETRIC.replace("[1], \"box\"", "[3], \"box\""));
    assert_eq!(entroinv(&["solve", &infeasible]).status.code(), Some(2));
    let no_box = write(&dir, "nobox.json", r#"{"A": [[1, 1]], "y": [1]}"#);
    let o = entroinv(&["solve", &no_box]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("box"));
    let broken = write(&dir, "broken.json", "{\"A\": [[1, 1]],");
    assert_eq!(entroinv(&["solve", &broken]).status.code(), Some(1));
    assert_eq!(entroinv(&["solve", "/nonexistent/problem.json"]).status.code(), Some(1));
}

#[test]
fn result_round_trips_at_full_precision() {
    let dir = TempDir::new().unwrap();
    let problem = write(
        &dir,
        "p.json",
        r#"{"A": [[1, 2, 3], [1, 1, 1]], "y": [2.5, 1], "box": {"lower": [0, 0, 0], "upper": [1, 1, 1]}}"#,
    );
    let o = entroinv(&["solve", &problem]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let r = json(text.as_bytes());
    let xi: Vec<f64> = r["xi"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for v in &xi {
        assert!(text.contains(&format!("{v:.16e}")));
    }
    assert!((xi[0] - 0.102_832_959_837_791_09).abs() < 1e-12);
}

#[test]
fn geodesic_commands() {
    let o = entroinv(&["geodesic", "--space", "xi", "--from", "0.25", "--to", "0.75"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o.stdout);
    assert!((r["distance"].as_f64().unwrap() - std::f64::consts::PI / 3.0).abs() < 1e-12);
    assert_eq!(r["path_samples"].as_array().unwrap().len(), 33);

    let o = entroinv(&["geodesic", "--space", "tau", "--from", "0.3,-1", "--to", "0.3,-1", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o.stdout)["distance"].as_f64(), Some(0.0));

    let o = entroinv(&["geodesic", "--space", "surface", "--from", "0.5,0.5", "--to", "0.4,0.6"]);
    assert_eq!(o.status.code(), Some(1));
    let o = entroinv(&["geodesic", "--space", "xi", "--from", "1.5", "--to", "0.5"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "p.json", SYMMETRIC);
    let o = entroinv(&["geodesic", "--space", "lambda", "--from", "-1", "--to", "2", "--problem", &problem]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o.stdout);
    let residuals = r["audit_residuals"]["range_residuals"].as_array().unwrap();
    assert!(residuals.iter().all(|v| v.as_f64().unwrap() < 1e-9));
}

#[test]
fn sensitivity_command() {
    let dir = TempDir::new().unwrap();
    let identity = write(
        &dir,
        "id.json",
        r#"{"A": [[1, 0], [0, 1]], "y": [0.3, 0.6], "box": {"lower": [0, 0], "upper": [1, 1]}}"#,
    );
    let o = entroinv(&["sensitivity", &identity, "--dy", "0.01,-0.02"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o.stdout);
    assert!((r["dxi"][0].as_f64().unwrap() - 0.01).abs() < 1e-12);
    assert!((r["dxi"][1].as_f64().unwrap() + 0.02).abs() < 1e-12);

    let o = entroinv(&["sensitivity", &identity, "--dy", "0,0"]);
    assert_eq!(json(&o.stdout)["dxi"][0].as_f64(), Some(0.0));

    let general = write(
        &dir,
        "g.json",
        r#"{"A": [[1, 2, -1], [0.5, 1, 1]], "y": [0.8, 1.1], "box": {"lower": [0, 0, 0], "upper": [1, 1, 1]}}"#,
    );
    let o = entroinv(&["sensitivity", &general, "--dy", "0.01,0.005", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let ratio = json(&o.stdout)["first_order_ratio"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");

    let rank_deficient = write(
        &dir,
        "rd.json",
        r#"{"A": [[1, 1], [2, 2]], "y": [1, 2], "box": {"lower": [0, 0], "upper": [1, 1]}}"#,
    );
    assert_eq!(entroinv(&["sensitivity", &rank_deficient, "--dy", "0,0"]).status.code(), Some(3));
}

#[test]
fn marginals_command() {
    let o = entroinv(&["marginals", "--rows", "0.5,0.5", "--cols", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    for _ in 0..2 {
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!(row.iter().all(|v| (v - 0.25).abs() < 1e-12));
    }

    let o = entroinv(&["marginals", "--rows", "0.5,0.6", "--cols", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1.1") && err.contains(" 1"), "{err}");

    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.json");
    let o = entroinv(&[
        "marginals", "--rows", "0.6,0.4", "--cols", "0.7,0.3", "--cost", "0,1,1,0", "--sweep",
        "0.5,0.45,0.4,0.35,0.3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let blocks = json(&std::fs::read(&out).unwrap());
    let blocks = blocks.as_array().unwrap();
    assert_eq!(blocks.len(), 5);
    assert!(blocks.iter().all(|b| b["status"] == "Converged"));
}

#[test]
fn verify_command() {
    let o = entroinv(&["verify", "--suite", "bounds"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("sinh_literal_violations"));
    assert!(entroinv(&["verify", "--suite", "nope"]).status.code() == Some(1));

    let a = entroinv(&["verify", "--suite", "entropy", "--seed", "5"]);
    let b = Command::new(env!("CARGO_BIN_EXE_entroinv"))
        .args(["verify", "--suite", "entropy"])
        .env("ENTROINV_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(Path::new(env!("CARGO_BIN_EXE_entroinv")).exists());
}
