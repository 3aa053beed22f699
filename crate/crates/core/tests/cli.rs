//! End-to-end runs of the `maestro` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn maestro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maestro"))
        .args(args)
        .env_remove("MAESTRO_LIMIT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(rel: &str) -> String {
    corpus(rel).display().to_string()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maestro-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_counter_holds() {
    let o = maestro(&["check", &p("models/counter.yaml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("HOLDS").count(), 3);
}

#[test]
fn check_json_is_parseable() {
    let o = maestro(&["check", "--json", &p("models/counter.yaml")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_file_exits_2() {
    let o = maestro(&["check", "no/such/model.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such/model.yaml"));
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(maestro(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn compose_then_check_finds_the_integration_flaw() {
    let out = tmp("torc-dsrc.yaml");
    let witness = tmp("witness.json");
    let o = maestro(&[
        "compose",
        &p("models/baseline-load.yaml"),
        &p("transforms/torc.integra"),
        &p("transforms/dsrc.integra"),
        &p("transforms/ni-torc.integra"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = maestro(&["check", out.to_str().unwrap(), "--trace-out", witness.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NonInterference: FAILS"));
    let t: maestro::Trace = serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert!(!t.steps.is_empty());
}

#[test]
fn compose_with_repair_holds() {
    let out = tmp("torc-dsrm.yaml");
    let o = maestro(&[
        "compose",
        &p("models/baseline-load.yaml"),
        &p("transforms/torc.integra"),
        &p("transforms/dsrm.integra"),
        &p("transforms/ni-torc.integra"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(maestro(&["check", out.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn compose_without_programs_is_identity() {
    let out = tmp("identity.yaml");
    maestro(&["compose", &p("models/baseline-load.yaml"), "-o", out.to_str().unwrap()]);
    let a = maestro::corpus::load_model("baseline-load").unwrap();
    let b = maestro::parse_model(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn matrix_reports_each_set_in_order() {
    let t = |n: &str| p(&format!("transforms/{n}.integra"));
    let o = maestro(&[
        "compose",
        &p("models/baseline-load.yaml"),
        "--matrix",
        &format!("{},{}", t("torc"), t("ni-torc")),
        "--matrix",
        &format!("{},{},{}", t("torc"), t("dsrc"), t("ni-torc")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("torc+ni-torc") && lines[0].ends_with("holds"));
    assert!(lines[1].starts_with("torc+dsrc+ni-torc") && lines[1].contains("FAILS NonInterference"));
}

#[test]
fn and_or_conflict_exits_2() {
    let a = tmp("and.integra");
    let b = tmp("or.integra");
    std::fs::write(&a, "GUARD_AND IssueEvent, core.done = 0\n").unwrap();
    std::fs::write(&b, "GUARD_OR IssueEvent, core.done = 1\n").unwrap();
    let o = maestro(&["compose", &p("models/baseline-load.yaml"), a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("both AND and OR"));
}

#[test]
fn trace_fig2_tree_ends_at_121() {
    let o = maestro(&["trace", &p("models/fig2-cache-miss.yaml"), "--format", "tree"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("DataToCore#9 s10/t121"));
}

#[test]
fn trace_steps_limits_length() {
    let o = maestro(&["trace", &p("models/counter.yaml"), "--steps", "3"]);
    assert_eq!(stdout(&o).matches("step ").count(), 3);
}

#[test]
fn trace_rejects_violating_assignment() {
    let o = maestro(&["trace", &p("models/counter.yaml"), "--set", "ctr1.entry=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_no_stutter_stops_early() {
    let o = maestro(&["trace", &p("models/two-event-delay.yaml"), "--no-stutter", "--format", "json"]);
    let t: maestro::Trace = serde_json::from_slice(&o.stdout).unwrap();
    assert!(t.terminated_early);
    assert!(t.steps.len() < 8);
}

#[test]
fn emit_alloy_writes_file_and_warns_on_narrow_ints() {
    let out = tmp("counter.als");
    let o = maestro(&["emit-alloy", &p("models/counter.yaml"), "-o", out.to_str().unwrap(), "--bitvector-lib", "util/bv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().contains("open util/bv as bv"));

    let narrow = tmp("narrow.yaml");
    let text = std::fs::read_to_string(corpus("models/counter.yaml")).unwrap().replace("IntWidth: 7", "IntWidth: 4");
    std::fs::write(&narrow, text).unwrap();
    let o = maestro(&["emit-alloy", narrow.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("-- WARNING"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn emit_alloy_rejects_invalid_model() {
    let bad = tmp("bad.yaml");
    std::fs::write(&bad, "MachineState: []\nEvents: []\n").unwrap();
    assert_eq!(maestro(&["emit-alloy", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn limit_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_maestro"))
        .args(["check", &p("models/baseline-load.yaml")])
        .env("MAESTRO_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("above the limit of 2"));
}
