use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssfp")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_fig2_and_validate_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("ro.json");
    let out = ssfp(&["solve", "--instance", "builtin:fig2", "--model", "ro", "--flow", "d", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("objective  11"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["objective"].as_f64(), Some(11.0));

    let ok = ssfp(&["validate", "--instance", "builtin:fig2", "--solution", path(&report)]);
    assert_eq!(ok.status.code(), Some(0));

    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"first_stage": []}"#).unwrap();
    let bad = ssfp(&["validate", "--instance", "builtin:fig2", "--solution", path(&empty)]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn solve_at_a_given_probability() {
    let out = ssfp(&["solve", "--instance", "builtin:fig2", "--model", "so", "--flow", "u", "--rho2", "0.45"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("objective  10.8"), "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ssfp(&["solve", "--instance", "builtin:fig2"]).status.code(), Some(2));
    assert_eq!(ssfp(&["solve", "--instance", "builtin:nope", "--model", "do", "--flow", "d"]).status.code(), Some(2));
    let bad_rho = ssfp(&["solve", "--instance", "builtin:fig2", "--model", "so", "--flow", "d", "--rho2", "1.5"]);
    assert_eq!(bad_rho.status.code(), Some(2));
    let out = ssfp(&["curves", "--grid", "0:1", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_exit_1() {
    let out = ssfp(&["solve", "--instance", "/nonexistent/x.json", "--model", "do", "--flow", "d"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
}

#[test]
fn curves_report_the_intersections() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curves.csv");
    let out = ssfp(&["curves", "--instance", "builtin:fig2", "--grid", "0:1:0.1", "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("intersections: 0.41666666666666"), "{}", stdout(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("rho2,route_1,route_2,route_3,so_optimum,vss"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn generated_instances_round_trip_through_the_tools() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("grid.json");
    let out = ssfp(&["gen", "--config", "small-grid", "--seed", "3", "--out", path(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let report = dir.path().join("so.json");
    let solved = ssfp(&["solve", "--instance", path(&inst), "--model", "so", "--flow", "d", "--out", path(&report)]);
    assert_eq!(solved.status.code(), Some(0));
    assert_eq!(ssfp(&["validate", "--instance", path(&inst), "--solution", path(&report)]).status.code(), Some(0));

    let lp = dir.path().join("so.lp");
    let out = ssfp(&["export-lp", "--instance", path(&inst), "--model", "so", "--flow", "d", "--out", path(&lp)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&lp).unwrap();
    assert!(ssfp_core::lp_format::parse_lp(&text).is_ok());

    let sweep = dir.path().join("sweep.json");
    let out = ssfp(&["gen", "--config", "sweep-setting", "--setting", "2-1-3", "--seed", "1", "--out", path(&sweep)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        ssfp(&["gen", "--config", "sweep-setting", "--setting", "2-1", "--out", path(&sweep)]).status.code(),
        Some(2)
    );
    assert_eq!(ssfp(&["gen", "--config", "realistic", "--out", path(&sweep)]).status.code(), Some(2));
}

#[test]
fn node_limit_exits_4() {
    let out = ssfp(&["solve", "--instance", "builtin:four-cycle", "--model", "do", "--flow", "u", "--node-limit", "1"]);
    // the root relaxation is 2 while the optimum is 3
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node limit"));
}

#[test]
fn small_sweep_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = ssfp(&["sweep", "--settings", "2-1-3", "--seeds", "1", "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["sweep.csv", "matrix.csv", "ratios.csv", "curves.csv", "timings.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 2);
    assert!(sweep.lines().nth(1).unwrap().starts_with("2-1-3,2,1,3,0,ok,"));
}
