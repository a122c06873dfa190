use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn cvgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvgate"))
        .args(args)
        .env_remove("CVGATE_CUTOFF")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn compile_squeezer_with_fixed_cubic_split() {
    let dir = tempdir().unwrap();
    let out_dir = dir.path().join("sq");
    let out = cvgate(&[
        "compile",
        "--target",
        "squeeze",
        "--db",
        "10",
        "--split",
        "fixed-cubic",
        "--t2",
        "0.1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let t1 = plan["plan"]["t1"].as_f64().unwrap();
    assert!((t1 * 0.1 - 2.846).abs() < 1e-3);
    assert_eq!(plan["gate_count"], 7);
    let text = fs::read_to_string(out_dir.join("sequence.txt")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("cubic_x")));
    assert!(out_dir.join("plan.json").exists());
}

#[test]
fn compile_coupler_reports_repetitions() {
    let out = cvgate(&[
        "compile",
        "--target",
        "number-coupler",
        "--theta-total",
        "1.4",
        "--theta-step",
        "0.1",
    ]);
    assert!(out.status.success());
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(plan["plan"]["repetitions"], 14);
}

#[test]
fn compile_with_missing_parameter_is_a_usage_error() {
    let out = cvgate(&["compile", "--target", "quad-x", "--t1", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_preset_writes_artifacts() {
    let dir = tempdir().unwrap();
    let out = cvgate(&["run", "trotter_order", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("order1_ratio"));
    let json = fs::read_to_string(dir.path().join("result.json")).unwrap();
    let result: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(result["kind"], "trotter_order");
    assert_eq!(result["certificate"]["converged"], true);
}

#[test]
fn batch_run_from_config_file_uses_subdirectories() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(
        &config,
        r#"
schema_version = 1
name = "small_squeeze"

[experiment]
kind = "squeezing"
db = 3.0
cutoff = 48
tolerance = 1e-3
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cvgate(&[
        "run",
        config.to_str().unwrap(),
        "resolvability_sweep",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("small_squeeze/result.json").exists());
    assert!(out_dir.join("resolvability_sweep/table.csv").exists());
}

#[test]
fn unreadable_config_exits_2() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "schema_version = 1\nname = \"x\"\n[experiment]\nkind = \"nope\"\n",
    )
    .unwrap();
    assert_eq!(cvgate(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cvgate(&["run", "no_such_preset"]).status.code(), Some(2));
}

#[test]
fn cutoff_override_below_minimum_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_cvgate"))
        .args(["run", "squeezing_10db"])
        .env("CVGATE_CUTOFF", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncation_unsafe_run_exits_3() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("tight.toml");
    fs::write(
        &config,
        r#"
schema_version = 1
name = "tight"

[experiment]
kind = "squeezing"
db = 10.0
cutoff = 12
tolerance = 1e-3
"#,
    )
    .unwrap();
    let out = cvgate(&["run", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn core_check_passes() {
    let out = cvgate(&["check", "--suite", "core", "--cutoff", "16"]);
    assert!(out.status.success());
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn table_prints_csv() {
    let out = cvgate(&["table", "--thetas", "1.0,1.3", "--dbs", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("theta,db,r,rule"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn show_config_round_trips_through_run() {
    let dir = tempdir().unwrap();
    let shown = cvgate(&["run", "--show-config", "trotter_order"]);
    assert!(shown.status.success());
    let path = dir.path().join("trotter.toml");
    fs::write(&path, shown.stdout).unwrap();
    let again = cvgate(&["run", "--show-config", path.to_str().unwrap()]);
    assert_eq!(stdout(&again), fs::read_to_string(&path).unwrap());
}
