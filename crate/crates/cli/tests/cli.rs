use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn coldseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coldseq"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn sequence_example_one() {
    let v = stdout_json(&coldseq(&["sequence", "3100", "--order", "C1,C2,C3,C4"]));
    let loads: Vec<f64> = v["machines"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["load_kw"].as_f64().unwrap())
        .collect();
    assert_eq!(loads, [2861.0, 239.0, 0.0, 0.0]);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn sequence_optimal_reports_realizing_order() {
    let v = stdout_json(&coldseq(&["sequence", "3100", "--optimal"]));
    assert_eq!(v["mode"], "optimal");
    assert!(v["total_power_kw"].as_f64().unwrap() <= 428.1);
    assert_eq!(v["order"].as_array().unwrap().len(), 4);
}

#[test]
fn sequence_zero_and_infeasible() {
    let v = stdout_json(&coldseq(&["sequence", "0"]));
    assert_eq!(v["total_power_kw"], 0.0);
    assert_eq!(coldseq(&["sequence", "10000"]).status.code(), Some(2));
}

#[test]
fn usage_and_input_exit_codes() {
    assert_eq!(coldseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        coldseq(&["sequence", "100", "--order", "C1,C9,C3,C4"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        coldseq(&["--fleet", "/definitely/missing.json", "bounds"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(coldseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_report() {
    let v = stdout_json(&coldseq(&["bounds"]));
    assert!((v["bound"].as_f64().unwrap() - 8.85).abs() < 0.01);
}

#[test]
fn compare_constant_full_profile_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write(
        dir.path(),
        "p.csv",
        "stage,load_kw\n0,9237\n1,9237\n2,9237\n",
    );
    let v = stdout_json(&coldseq(&[
        "compare",
        "--profile",
        &profile,
        "--surplus-step",
        "10",
    ]));
    for (_, c) in v["avg_power_kw"].as_object().unwrap() {
        assert!((c.as_f64().unwrap() - 1539.0).abs() < 1e-9);
    }
    assert!(v["dominance"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d["holds"] == true));
}

#[test]
fn compare_lists_infeasible_stages() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write(
        dir.path(),
        "p.csv",
        "stage,load_kw\n0,100\n1,9999\n2,200\n3,9500\n",
    );
    let out = coldseq(&["compare", "--profile", &profile]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[1, 3]"));
}

#[test]
fn malformed_profile_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write(dir.path(), "p.csv", "stage,load_kw\n0,abc\n");
    assert_eq!(
        coldseq(&["shift", "--profile", &profile]).status.code(),
        Some(3)
    );
}

#[test]
fn online_plan_round_trips_through_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let profile = write(
        dir.path(),
        "p.csv",
        "stage,load_kw\n0,1000\n1,4000\n2,2500\n3,0\n4,6000\n",
    );
    let plan = dir.path().join("plan.csv");
    let out = coldseq(&[
        "online",
        "--profile",
        &profile,
        "--format",
        "csv",
        "--out",
        plan.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&coldseq(&["cdf", plan.to_str().unwrap()]));
    for share in v["capacity"].as_array().unwrap() {
        assert_eq!(share["trim_fraction"], 0.0);
    }
    assert_eq!(v["cdf"].as_array().unwrap().len(), 4);
}

#[test]
fn gen_is_deterministic_and_seedable() {
    let a = coldseq(&["gen", "--format", "csv"]);
    let b = coldseq(&["gen", "--format", "csv"]);
    let c = coldseq(&["gen", "--format", "csv", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(
        String::from_utf8_lossy(&a.stdout).lines().count(),
        14 * 144 + 1
    );
}

#[test]
fn gap_and_partition_csv() {
    let out = coldseq(&["gap", "--from", "1000", "--to", "1010", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("q_in_kw,best_kw,worst_kw,ratio"));
    assert_eq!(text.lines().count(), 12);
    let v = stdout_json(&coldseq(&["partition", "--step", "10"]));
    let iv = v["intervals"].as_array().unwrap();
    assert!(!iv.is_empty());
    let hi = iv.last().unwrap()["hi_kw"].as_f64().unwrap();
    assert!(hi > 9227.0 && hi <= 9237.0);
}

#[test]
fn custom_fleet_file() {
    let dir = tempfile::tempdir().unwrap();
    let fleet = write(
        dir.path(),
        "f.json",
        r#"{"compressors":[{"id":"A","q_min_kw":100,"q_max_kw":1000,"p_min_kw":50,"p_max_kw":200}]}"#,
    );
    let v = stdout_json(&coldseq(&[
        "--fleet", &fleet, "sequence", "50", "--format", "json",
    ]));
    assert_eq!(v["machines"][0]["load_kw"], 100.0);
}
