use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn envlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_envlab"))
        .args(args)
        .env_remove("ENVLAB_SEED")
        .output()
        .expect("spawn envlab")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn env_reports_all_envelopes() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 3, "p": 3.0, "weights": [1, 1, 1]}"#);
    let sub = write(&dir, "sub.json", r#"{"basis": [[1, 1, 1], [1, 1, 2]]}"#);
    let o = envlab(&["env", "--space", s(&space), "--subspace", s(&sub)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let out = &v["outputs"];
    for key in ["isometric", "algebraic", "conditional", "lattice"] {
        assert_eq!(out[key]["dim"], 2, "{key}");
    }
    assert_eq!(out["unital"], true);
}

#[test]
fn same_seed_same_output() {
    let a = envlab(&["verify", "--suite", "mazur", "--trials", "5", "--seed", "7"]);
    let b = envlab(&["verify", "--suite", "mazur", "--trials", "5", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    let (mut ja, mut jb) = (stdout_json(&a), stdout_json(&b));
    for j in [&mut ja, &mut jb] {
        j.as_object_mut().unwrap().remove("wall_time_ms");
    }
    assert_eq!(ja["seed"], 7);
    assert_eq!(ja, jb);
}

#[test]
fn report_round_trips_through_json() {
    let o = envlab(&["verify", "--suite", "constants"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["seed"], 42);
    let text = serde_json::to_string(&v).unwrap();
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v, back);
}

#[test]
fn c2_grid_to_csv() {
    let o = envlab(&["c2", "--grid", "1.1:6:0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 51);
    assert!(lines[1].starts_with("1.1,"));

    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c2.csv");
    let o = envlab(&["c2", "--grid", "1.1:6:0.1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 51);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c2.csv.report.json")).unwrap()).unwrap();
    assert_eq!(report["outputs"]["rows"], 50);
    assert_eq!(report["outputs"]["all_monotone"], true);
}

#[test]
fn projection_constant_of_plane_in_l1() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 3, "p": 1, "weights": [1, 1, 1]}"#);
    let sub = write(&dir, "sub.json", r#"{"basis": [[1, -1, 0], [0, 1, -1]]}"#);
    let o = envlab(&["proj", "--space", s(&space), "--subspace", s(&sub)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let norm = v["outputs"]["upper_bound"].as_f64().unwrap();
    assert!((norm - 4.0 / 3.0).abs() < 1e-9, "{norm}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(envlab(&["verify", "--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(envlab(&["c2", "--grid", "nonsense"]).status.code(), Some(2));
    assert_eq!(envlab(&["--tol", "-1", "suites"]).status.code(), Some(2));
    assert_eq!(envlab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn parse_errors_exit_2_and_name_the_file() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 3, "p": 2, "weights": [1, 1]}"#);
    let sub = write(&dir, "sub.json", r#"{"basis": [[1, 0, 0]]}"#);
    let o = envlab(&["env", "--space", s(&space), "--subspace", s(&sub)]);
    assert_eq!(o.status.code(), Some(2));
    let broken = write(&dir, "broken.json", "{not json");
    let o = envlab(&["env", "--space", s(&broken), "--subspace", s(&sub)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json"));
}

#[test]
fn non_contraction_exits_1() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 2, "p": 3, "weights": [1, 1]}"#);
    let op = write(&dir, "op.json", r#"{"matrix": [[2, 0], [0, 1]]}"#);
    let o = envlab(&["ergodic", "--space", s(&space), "--operator", s(&op)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ergodic_projection_of_a_cycle() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 3, "p": 3, "weights": [1, 1, 1]}"#);
    let op = write(&dir, "op.json", r#"{"combination": [{"weight": 1, "perm": [2, 3, 1], "signs": [1, 1, 1]}]}"#);
    let o = envlab(&["ergodic", "--space", s(&space), "--operator", s(&op)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let rows = v["outputs"]["projection"].as_array().unwrap();
    for row in rows {
        for x in row.as_array().unwrap() {
            assert!((x.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
    }
}

#[test]
fn cesaro_budget_exhaustion_exits_3_with_partial_report() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", r#"{"n": 3, "p": 3, "weights": [1, 1, 1]}"#);
    let op = write(&dir, "op.json", r#"{"partition": [[1], [2, 3]]}"#);
    let cyc = write(&dir, "cyc.json", r#"{"combination": [{"weight": 1, "perm": [2, 3, 1], "signs": [1, 1, 1]}]}"#);
    assert_eq!(envlab(&["ergodic", "--space", s(&space), "--operator", s(&op)]).status.code(), Some(0));
    let o = envlab(&["ergodic", "--space", s(&space), "--operator", s(&cyc), "--method", "cesaro", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let partial = stdout_json(&o);
    assert!(partial["residual"].as_f64().unwrap() > 0.0);
}
