use std::fs;
use std::process::{Command, Output};

use cautious_routing::scalar::parse_rational;
use cautious_routing::BigRational;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cautious-routing"));
    for var in ["CAUTIOUS_ROUTING_GAP_TOL", "CAUTIOUS_ROUTING_CHECK_TOL", "CAUTIOUS_ROUTING_MAX_ITER"] {
        cmd.env_remove(var);
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rational(v: &Value) -> BigRational {
    parse_rational(&v.to_string()).expect("decimal literal")
}

const FIG3: &str = r#"{
  "nodes": ["s", "i", "t"],
  "edges": [
    {"id": "e1", "tail": "s", "head": "t", "a": 5, "b": 2, "d": 1},
    {"id": "e2", "tail": "s", "head": "i", "a": 1, "b": 0, "d": 1},
    {"id": "e3", "tail": "i", "head": "t", "a": "3/2", "b": "3/2", "d": 1},
    {"id": "e4", "tail": "s", "head": "i", "a": 0, "b": "23/15", "d": 1},
    {"id": "e5", "tail": "i", "head": "t", "a": 3, "b": 1, "d": 1}
  ],
  "types": [{"id": "all", "source": "s", "sink": "t", "demand": 1, "r": 1}],
  "undirected": true
}"#;

#[test]
fn pigou_social_cost() {
    let out = run(&["solve", "--scenario", "pigou", "--epsilon", "0.1", "--r", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(rational(&v["social_cost"]), BigRational::new(17.into(), 16.into()));
    assert_eq!(v["equilibrium_check"]["passed"], Value::Bool(true));
}

#[test]
fn fig3_classification() {
    let out = run(&["classify", "--scenario", "fig3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["sp"].clone(), v["li"].clone(), v["sli"].clone()), (true.into(), false.into(), false.into()));
}

#[test]
fn thm1_suite_exits_zero() {
    let out = run(&["verify", "thm1", "--seeds", "100", "--r", "1.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["failures"], Value::from(0));
    assert_eq!(v["runs"], Value::from(100));
}

#[test]
fn instance_file_with_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.json");
    fs::write(&path, FIG3).unwrap();
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cost = rational(&v["social_cost"]);
    let want = BigRational::new(62.into(), 21.into());
    let diff = (cost - want.clone()) / want;
    assert!(diff < BigRational::new(1.into(), 1_000_000_000.into()) && -diff < BigRational::new(1.into(), 1_000_000_000.into()));

    let out = run(&["classify", "--instance", path.to_str().unwrap(), "--type", "0"]);
    assert_eq!(json(&out)["sp"], Value::Bool(true));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&["-o", path.to_str().unwrap(), "sweep", "--scenario", "parking", "--grid", "0.5,1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,cost_eq,cost_opt,poa,onstreet_mass,garage_mass");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.5,"));
}

#[test]
fn malformed_json_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"nodes\": [\"s\",\n  oops\n}").unwrap();
    let out = run(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["solve", "--scenario", "pigou", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--instance", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--scenario", "pigou", "--epsilon", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical() {
    let args = ["solve", "--scenario", "grid", "--rows", "3", "--cols", "4", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let one = run(&["--jobs", "1", "verify", "thm2", "--seeds", "20"]);
    let many = run(&["--jobs", "4", "verify", "thm2", "--seeds", "20"]);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn environment_overrides_defaults() {
    let out = bin().args(["solve", "--scenario", "fig3"]).env("CAUTIOUS_ROUTING_MAX_ITER", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["solve", "--scenario", "fig3", "--max-iter", "100000"])
        .env("CAUTIOUS_ROUTING_MAX_ITER", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn scenario_round_trips_through_instance_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("parking.json");
    let out = run(&["-o", path.to_str().unwrap(), "scenario", "parking", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let direct = json(&run(&["solve", "--scenario", "parking", "--r", "2"]));
    let loaded = json(&run(&["solve", "--instance", path.to_str().unwrap()]));
    assert_eq!(direct["social_cost"], loaded["social_cost"]);
}
