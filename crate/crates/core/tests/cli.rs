use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopf-berger")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hb_cli_{}_{name}", std::process::id()))
}

#[test]
fn spectra_report_passes() {
    let out = run(&["spectra", "--family", "O", "--tau", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["presentation"]["dim_p1"], 7);
    assert!(v.get("wall_time_s").is_none());
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(run(&["spectra", "--family", "Q", "--tau", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["spectra", "--family", "C", "--tau", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--family", "O", "--n", "2", "--tau", "0.5"]).status.code(), Some(2));
}

#[test]
fn tight_tolerance_fails_with_exit_one() {
    let out = run(&["spectra", "--family", "H", "--tau", "0.3", "--tol=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn markdown_to_file() {
    let path = scratch("tables.md");
    let out = run(&["--format", "markdown", "--out", path.to_str().unwrap(), "tables", "--family", "H", "--n", "2", "--tau", "0.75"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    assert!(text.contains("| check | expected | actual | residual | pass |"));
    assert!(text.trim_end().ends_with("Overall: PASS"));
}

#[test]
fn timing_is_opt_in() {
    let v = json(&run(&["--timing", "phi", "--tau", "0.4", "--points", "5"]));
    assert!(v["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn search_is_reproducible_and_writes_hits() {
    let args = ["search", "--family", "H", "--tau", "0.3333333333333333", "--restarts", "20", "--isotropic"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let path = scratch("hits.jsonl");
    let mut with_hits = args.to_vec();
    with_hits.extend(["--hits", path.to_str().unwrap()]);
    assert_eq!(run(&with_hits).status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let last = lines.last().unwrap();
    assert_eq!(last["summary"]["unclassified"], 0);
    assert_eq!(lines.len() - 1, last["summary"]["hits"].as_u64().unwrap() as usize);
    assert!(lines[0]["frame"].is_array());
}

#[test]
fn geodesic_csv() {
    let path = scratch("geo.csv");
    let out = run(&["geodesic", "--alpha", "0.6", "0", "0.8", "--tau", "2.0", "--samples", "11", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("s,re_z1,im_z1,re_z2,im_z2"));
    assert_eq!(run(&["geodesic", "--alpha", "1", "1", "1", "--tau", "2.0"]).status.code(), Some(2));
}

#[test]
fn catalog_and_verify() {
    let v = json(&run(&["catalog", "--family", "H", "--n", "2", "--tau", "0.25"]));
    let tags: Vec<&str> = v["data"].as_array().unwrap().iter().map(|e| e["tag"].as_str().unwrap()).collect();
    assert!(tags.contains(&"NWP_RP3"));
    let out = run(&["verify-catalog", "--family", "H", "--n", "2", "--tau", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
}
