use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcp_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcp-lab")).args(args).output().expect("binary runs")
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_example_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "ex1_a21.json",
        r#"{"tensor": {"m": 3, "n": 2, "format": "sparse", "entries": [
            {"index": [1,1,1], "value": -1}, {"index": [1,2,2], "value": -1},
            {"index": [2,1,1], "value": -1}, {"index": [2,2,2], "value": -1}]},
            "a": [2, 1]}"#,
    );
    let out = tcp_lab(&["solve", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["status"], "finite");
    let xs: Vec<&Value> = v["points"].as_array().unwrap().iter().map(|p| &p["x"]).collect();
    assert_eq!(xs, [&serde_json::json!([0.0, 0.0]), &serde_json::json!([0.0, 1.0])]);
}

#[test]
fn zero_tensor_is_not_r0() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "zero_3_2.json", r#"{"m": 3, "n": 2, "format": "dense", "entries": [0,0,0,0,0,0,0,0]}"#);
    let out = tcp_lab(&["check-r0", "--tensor", &t]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_out(&out);
    assert_eq!(v["verdict"], "fails");
    assert_eq!(v["certificate"]["kind"], "ray");
}

#[test]
fn chi_prints_bound() {
    let out = tcp_lab(&["chi", "--m", "3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "118098");
    assert_eq!(tcp_lab(&["chi", "--m", "3"]).status.code(), Some(2));
}

#[test]
fn golden_suite_passes() {
    let out = tcp_lab(&["golden"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_out(&out)["failed"], 0);
}

#[test]
fn malformed_input_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"m\": 3,\n \"n\": 2,\n \"entries\": [1, 2,]}");
    let out = tcp_lab(&["check-r0", "--tensor", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let short = write(dir.path(), "short.json", r#"{"m": 3, "n": 2, "entries": [1, 2]}"#);
    let out = tcp_lab(&["check-r0", "--tensor", &short]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tensor"));

    let out = tcp_lab(&["solve", "--example", "ex1", "--a", "1,x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--a"));
}

#[test]
fn example_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let p = path.to_str().unwrap();
    let a = "-0.3333333333333333,1e-300";
    assert_eq!(tcp_lab(&["example", "--example", "monotone", "--a", a, "--out", p]).status.code(), Some(0));
    let again = dir.path().join("again.json");
    let solved = tcp_lab(&["solve", "--instance", p, "--out", again.to_str().unwrap()]);
    assert_eq!(solved.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let parsed = tcp_core::io::parse_instance(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed.a, vec![-0.3333333333333333, 1e-300]);
    assert_eq!(tcp_core::io::instance_to_json(&parsed), v);
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["usc", "--example", "ex1", "--a", "2,1", "--eps", "0.05", "--samples", "12", "--seed", "7"];
    let first = tcp_lab(&args);
    let second = tcp_lab(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let serial = Command::new(env!("CARGO_BIN_EXE_tcp-lab")).args(args).env("TCP_LAB_THREADS", "1").output().unwrap();
    assert_eq!(first.stdout, serial.stdout);

    let csv = dir.path().join("rows.csv");
    let mut with_csv = args.to_vec();
    with_csv.extend(["--csv", csv.to_str().unwrap()]);
    assert_eq!(tcp_lab(&with_csv).status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "sample_id,pert_norm_tensor,pert_norm_vec,n_points,max_norm,excess,flags");
    assert_eq!(tcp_core::io::read_report_csv(&text).unwrap().len(), 12);
}

#[test]
fn property_exit_codes() {
    assert_eq!(tcp_lab(&["check-copositive", "--example", "gus"]).status.code(), Some(0));
    assert_eq!(tcp_lab(&["check-copositive", "--example", "ex1"]).status.code(), Some(1));
    assert_eq!(tcp_lab(&["genericity", "--samples", "0"]).status.code(), Some(2));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_tcp-lab")).args(["chi", "--m", "3", "--n", "2"]).env("TCP_LAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}
