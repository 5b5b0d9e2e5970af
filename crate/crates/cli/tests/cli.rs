use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shortqip"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn value_of_measure_only_protocol() {
    let out = run(&["value", "--protocol", &fixture("measure_only.json")]);
    let report = json_of(&out);
    assert!((report["result"]["value"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert_eq!(report["command"], "value");
}

#[test]
fn params_report_full_scale_sample_count() {
    let report = json_of(&run(&["params", "--q", "1", "--gap", "1/4"]));
    let full = &report["result"]["arthur"]["full"];
    assert_eq!(full["n"], (1u64 << 55).to_string());
    assert_eq!(full["m"], "18446744073709551616");
    assert_eq!(full["epsilon"], "1/64");
    assert_eq!(report["result"]["arthur"]["resolved"]["executable"], false);
    assert_eq!(report["result"]["sample_size"]["by_epsilon"]["1/2"][0], "8192");
}

#[test]
fn params_with_overrides_include_definetti_bound() {
    let report = json_of(&run(&["params", "--override", "n=1,m=3"]));
    assert_eq!(report["result"]["definetti_bound"], "1");
    assert_eq!(report["result"]["arthur"]["resolved"]["regime"], "override");
}

#[test]
fn qiplog_exact_yes_on_echo_game() {
    let out = run(&["reduce", "qiplog", "--mode", "exact", "--protocol", &fixture("echo.json")]);
    let report = json_of(&out);
    assert_eq!(report["result"]["report"]["verdict"], "yes");
    assert_eq!(report["pipeline"], "qiplog");
}

#[test]
fn simulate_identity_prover_on_echo_game() {
    let out = run(&[
        "simulate",
        "--protocol",
        &fixture("echo.json"),
        "--prover",
        &fixture("identity_prover.json"),
        "--mode",
        "sampled",
        "--shots",
        "1000",
        "--seed",
        "9",
    ]);
    let report = json_of(&out);
    assert!((report["result"]["acceptance_probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report["result"]["accepted"], 1000);
    assert_eq!(report["seed"], 9);
}

#[test]
fn qma_pipeline_with_overrides() {
    let out = run(&[
        "reduce",
        "qma",
        "--protocol",
        &fixture("echo.json"),
        "--prover",
        &fixture("identity_prover.json"),
        "--override",
        "n=20,m=5,trials=50",
        "--seed",
        "4",
    ]);
    let report = json_of(&out);
    let r = &report["result"]["report"];
    assert!((r["diagnostics"]["analytic_accept_probability"].as_f64().unwrap() - 0.25).abs() < 1e-9);
    assert_eq!(report["result"]["params"]["resolved"]["n"], 20);
    assert_eq!(report["result"]["params"]["resolved"]["regime"], "override");
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["reduce", "qam", "--protocol", &fixture("qam_diag.json"), "--seed", "11", "--override", "trials=500"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report = json_of(&a);
    assert_eq!(report["seed"], 11);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut with_out = args.to_vec();
    let p = path.to_string_lossy().into_owned();
    with_out.extend(["--out", &p]);
    assert!(run(&with_out).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn human_rendering() {
    let out = run(&["value", "--protocol", &fixture("measure_only.json"), "--human"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("result.value = 0.7")));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["value", "--protocol", "/nonexistent/protocol.json"]).status.code(), Some(1));
    assert_eq!(run(&["value", "--protocol", &fixture("qam_diag.json")]).status.code(), Some(2));
    assert_eq!(run(&["value", "--protocol", &fixture("echo.json"), "--override", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let qma_full_scale = run(&[
        "reduce",
        "qma",
        "--protocol",
        &fixture("echo.json"),
        "--prover",
        &fixture("identity_prover.json"),
    ]);
    assert_eq!(qma_full_scale.status.code(), Some(5));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("measure_only.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["gap"] = Value::from(0.9);
    let bad = dir.path().join("bad_gap.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let out = run(&["value", "--protocol", &bad.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gap"));
}
