use std::path::Path;
use std::process::{Command, Output};

fn km(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_km")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn count_aps_counts_trivial_progressions() {
    let dir = tempfile::tempdir().unwrap();
    let set = write(dir.path(), "a.json", r#"{"group":"Z5","elements":[[0],[1],[3]]}"#);
    let out = km(&["count-aps", "--set", &set]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "5");
}

#[test]
fn verify_emits_an_envelope() {
    let out = km(&["verify", "bohrsiz", "--instances", "10", "--seed", "7", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "verify");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["passed"], true);
    assert!(v["inputs_digest"].as_str().is_some_and(|d| d.len() == 64));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(km(&["behrend", "--n", "0"]).status.code(), Some(2));
    assert_eq!(km(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(km(&["count-aps", "--set", "/nonexistent.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"group":"Z5","elements":[[9]]}"#);
    assert_eq!(km(&["count-aps", "--set", &bad]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["three-sum", "--n", "101", "--seed", "3", "--json"];
    let (a, b) = (km(&args), km(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn calibrate_writes_a_loadable_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.json");
    let p = path.to_str().unwrap();
    let out = km(&["--ledger", p, "verify", "unbalancing", "--instances", "20", "--calibrate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ledger = km::verify::Ledger::load(&path).unwrap();
    assert!(ledger.empirical.contains_key("k_unb"));
    let rerun = km(&["--ledger", p, "verify", "unbalancing", "--instances", "20"]);
    assert_eq!(rerun.status.code(), Some(0));
}
