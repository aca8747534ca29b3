use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotforge")).current_dir(root()).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn table_rows_all_match() {
    let o = run(&["table", "--in", "fixtures/table1.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["rows"], 84);
    assert_eq!(v["all_matching"], true);
}

#[test]
fn sphere_max_on_trigonometric_figure_eight() {
    let o = run(&["sphere", "fixtures/fig8_trig.json", "--mode", "max", "--samples", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["best_value"], 3);
}

#[test]
fn zero_direction_is_a_usage_error() {
    let o = run(&["bridge", "fixtures/fig8_trig.json", "--dir", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bridge", "--dir", "0,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_and_missing_curve_are_usage_errors() {
    assert_eq!(run(&["curvature", "square", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["curvature", "no_such_curve.json"]).status.code(), Some(2));
}

#[test]
fn domain_errors_carry_their_name() {
    let dir = tempfile::tempdir().unwrap();
    let pd = dir.path().join("hopf.txt");
    std::fs::write(&pd, "hopf X(1,3,2,4) X(3,1,4,2)\n").unwrap();
    let o = run(&["identify", pd.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotAKnot"));
}

#[test]
fn bridge_count_along_z() {
    let o = run(&["bridge", "unit_circle", "--dir", "0.3,-0.1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["b_v"], 1);
}

#[test]
fn identify_trefoil() {
    let dir = tempfile::tempdir().unwrap();
    let pd = dir.path().join("t.txt");
    std::fs::write(&pd, "t X(1,5,2,4) X(3,1,4,6) X(5,3,6,2)\n").unwrap();
    let v = json(&run(&["identify", pd.to_str().unwrap()]));
    assert_eq!(v[0]["candidates"][0], "3_1");
    assert_eq!(v[0]["determinant"], 3);
}

#[test]
fn project_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "project",
        "trefoil_polygon",
        "--dir",
        "0.1,0.2,1",
        "--svg",
        "t.svg",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["determinant"], 3);
    let svg = std::fs::read_to_string(dir.path().join("t.svg")).unwrap();
    assert!(svg.contains("class=\"gap\""));
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let args = ["census", "--patterns", "1,3,17"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_knotforge"))
        .current_dir(root())
        .env("KNOTFORGE_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["identified"].as_array().unwrap().iter().any(|n| n == "4_1"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "format = \"csv\"\nseed = 7\n[tolerances]\ntheta_min = 1e-5\n").unwrap();
    let o = run(&["table", "--in", "fixtures/table1.csv", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("name,lo,hi,exact,matches_table"));
    let o = run(&["table", "--in", "fixtures/table1.csv", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json(&o)["rows"], 84);
    let o = run(&["curvature", "square", "--theta-min", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}
