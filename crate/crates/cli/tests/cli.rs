mod support;

use std::process::{Command, Output};

use support::scenario_path;

fn mevlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mevlab")).args(args).output().expect("binary runs")
}

fn scn(name: &str) -> String {
    scenario_path(name).display().to_string()
}

fn temp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("mevlab-cli-{}-{name}", std::process::id()))
}

#[test]
fn exec_prints_each_state() {
    let out = mevlab(&["exec", &scn("bet_attack.scn")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("AMM[20:ETH, 5:T]"), "{text}");
    assert!(text.contains("loss of delta: 4"), "{text}");
}

#[test]
fn json_report_has_exact_and_decimal_rationals() {
    let out = mevlab(&["mev", &scn("airdrop.scn"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "mev");
    assert_eq!(v["mev"]["unrestricted"]["value"]["exact"], "10");
    assert_eq!(v["mev"]["interference"]["decimal"], "0.000000");
    assert_eq!(v["budget"]["mode"], "exact");
}

#[test]
fn out_file_matches_stdout_and_keys_are_sorted() {
    let path = temp("out.json");
    let out = mevlab(&["interference", &scn("doubler.scn"), "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written.as_bytes(), out.stdout.as_slice());
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["oracle-compare", &scn("airdrop_fee.scn"), "--format", "json"];
    assert_eq!(mevlab(&args).stdout, mevlab(&args).stdout);
}

#[test]
fn worker_count_does_not_change_results() {
    let one = mevlab(&["properties", &scn("sender.scn"), "--format", "json", "--workers", "1"]);
    let four = mevlab(&["properties", &scn("sender.scn"), "--format", "json", "--workers", "4"]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("workers");
        v
    };
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn missing_scenario_exits_2() {
    let out = mevlab(&["mev", "/nonexistent/none.scn"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_scenario_exits_2_with_line() {
    let path = temp("bad.scn");
    std::fs::write(&path, "adversary = [\"M\"]\ndelta = []\n[tokens.T]\nprice = 1\n[users.M]\nwallet = { T = -1 }\n").unwrap();
    let out = mevlab(&["mev", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));
}

#[test]
fn budget_overrun_exits_3() {
    let out = mevlab(&["mev", &scn("bet_attack.scn"), "--max-states", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn properties_hold_on_bundled_fixture() {
    let out = mevlab(&["properties", &scn("stripping.scn")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("violated"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = mevlab(&["mev", &scn("airdrop.scn"), "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
