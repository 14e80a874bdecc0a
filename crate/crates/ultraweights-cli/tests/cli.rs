use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultraweights")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn verdicts(v: &Value) -> Vec<(String, String)> {
    v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["condition"].as_str().unwrap().to_string(), r["verdict"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn analyze_reports_requested_conditions() {
    let out = run(&["analyze", "weight", "--spec", "gevrey:s=2", "--conditions", "om1,om5,om_snq"]);
    assert_eq!(out.status.code(), Some(0));
    let v = verdicts(&report(&out));
    for c in ["om1", "om5", "om_snq"] {
        assert!(v.contains(&(c.to_string(), "holds_with_witness".to_string())), "{c}: {v:?}");
    }
}

#[test]
fn failed_check_exits_one() {
    let out = run(&["analyze", "weight", "--spec", "gevrey:s=2", "--conditions", "om7"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["summary"]["unexpected"], 1);
}

#[test]
fn config_errors_exit_two_before_any_output() {
    for args in [
        &["analyze", "weight", "--spec", "gauss:s=2"][..],
        &["analyze", "weight", "--spec", "gevrey:s=2", "--conditions", "om9"][..],
        &["analyze", "weight", "--spec", "table:/nonexistent/w.csv"][..],
        &["verify", "--suite", "nope"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn log_power_index_exceeds_search_range() {
    let out = run(&["gamma", "--spec", "logpow:s=2", "--gamma-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["gamma_estimates"][0]["estimate"]["exceeds_max"], true);
}

#[test]
fn reports_are_deterministic_and_written_to_file() {
    let dir = std::env::temp_dir().join(format!("ultraweights-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("jets.json");
    let p = path.to_str().unwrap();
    let args = ["--seed", "7", "--out", p, "verify", "--suite", "jets"];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&path).unwrap());
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["config"]["seed"], "7");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dump_writes_csv() {
    let out = run(&["dump", "sequence", "--spec", "factorial", "--p-max", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7, "{text}");
    assert!(lines[0].starts_with("p,"));
}
