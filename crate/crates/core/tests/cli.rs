use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn memtrans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memtrans")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String) {
    let out = memtrans(args);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let (code, out) = run(&all);
    (code, serde_json::from_str(&out).expect("valid json"))
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn check_confirms_declared_verdicts() {
    let (code, out) = run(&["check", &path("sb.lit"), "--model", "sc"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("forbidden: confirmed"), "{out}");
    let (code, out) = run(&["check", &path("sb.lit"), "--model", "tso"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("allowed: confirmed"), "{out}");
}

#[test]
fn check_reports_a_missed_expectation() {
    let dir = std::env::temp_dir().join(format!("memtrans-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("sb_wrong.lit");
    let src = std::fs::read_to_string(fixture("sb.lit")).unwrap().replace("tso: allowed", "tso: forbidden");
    std::fs::write(&f, src).unwrap();
    let (code, out) = run(&["check", f.to_str().unwrap(), "--model", "tso"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("allowed: expected forbidden"), "{out}");
}

#[test]
fn program_without_assertion_allows_everything() {
    let (code, out) = run(&["check", &path("empty.lit"), "--model", "sc"]);
    assert_eq!(code, 0);
    assert!(out.contains("every outcome is allowed"));
}

#[test]
fn errors_exit_with_two() {
    let out = memtrans(&["check", "no/such/file.lit"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/file.lit"));
    assert_eq!(memtrans(&["check", &path("sb.lit"), "--model", "nonsense"]).status.code(), Some(2));
    assert_eq!(memtrans(&["safety", &path("sb.lit")]).status.code(), Some(2));
    assert_eq!(memtrans(&["pretraces", &path("sb.lit"), "--format", "dot"]).status.code(), Some(2));
}

#[test]
fn safety_by_effect_and_by_file_pair() {
    let (code, out) = run(&["safety", &path("mp.lit"), "--effect", "reorder R1 R2", "--model", "sc_rr"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("safe under sc_rr"));
    let (code, v) = json(&["safety", &path("sb.lit"), &path("sb_ro.lit"), "--model", "sc"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "unsafe");
    assert_eq!(v["witness"]["outcome"], "a=0 b=0");
    let (code, _) = run(&["safety", &path("sb.lit"), &path("sb_ro.lit"), "--model", "tso"]);
    assert_eq!(code, 0);
}

#[test]
fn construction_reports_crucial_sets() {
    let (code, v) = json(&["safety", &path("mp.lit"), "--effect", "reorder_rr R1 R2", "--construct"]);
    assert_eq!(code, 1);
    assert_eq!(v["construction"]["extended"]["outcome"]["a"], 1);
    assert_eq!(v["construction"]["source_crucial"].as_array().unwrap().len(), 2);
}

#[test]
fn partition_json_is_deterministic() {
    let args = ["executions", &path("sb.lit"), "--model", "sc"];
    let (_, a) = json(&args);
    let (_, b) = json(&args);
    assert_eq!(a, b);
    // 4 coherence orders keep the init writes first; each admits 2 of the 4 rf choices
    assert_eq!(a["partition"], serde_json::json!({ "consistent": 8, "inconsistent": 88 }));
    let table = a["outcome_table"].as_array().unwrap();
    assert_eq!(table.len(), 4);
    let both_zero = table.iter().find(|r| r["outcome"]["a"] == 0 && r["outcome"]["b"] == 0).unwrap();
    assert_eq!(both_zero["allowed"], false);
    let raw = memtrans(&["executions", &path("sb.lit"), "--format", "json"]).stdout;
    assert_eq!(raw, memtrans(&["executions", &path("sb.lit"), "--format", "json"]).stdout);
}

#[test]
fn dot_output_has_one_graph_per_execution() {
    let (code, out) = run(&["executions", &path("sb.lit"), "--format", "dot", "--consistent"]);
    assert_eq!(code, 0);
    let (_, v) = json(&["executions", &path("sb.lit")]);
    assert_eq!(out.matches("digraph").count() as u64, v["partition"]["consistent"].as_u64().unwrap());
    let (_, out) = run(&["check", &path("sc_e.exec"), "--format", "dot"]);
    assert_eq!(out.matches("digraph").count(), 1);
    assert_eq!(out.matches(" [label=\"init_").count() + out.matches(" [label=\"W").count() + out.matches(" [label=\"R").count(), 6);
}

#[test]
fn raw_execution_violations_carry_cycles() {
    let (code, v) = json(&["check", &path("sc_e.exec"), "--model", "sc"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "inconsistent");
    let viol = &v["violations"][0];
    assert_eq!(viol["rule"], "e");
    assert!(viol["cycle"].as_array().unwrap().iter().any(|x| x == "rb"));
}

#[test]
fn crucial_sets_of_the_porf_cycle() {
    let (_, v) = json(&["crucial", &path("porf_cyc.exec"), "--model", "porf"]);
    let minimal = &v["executions"][0]["minimal"];
    assert_eq!(minimal, &serde_json::json!([["R1"], ["R2"]]));
    let (_, v) = json(&["crucial", &path("po_mo.exec"), "--model", &path("po_mo.cat")]);
    assert_eq!(v["executions"][0]["minimal"], serde_json::json!([]));
}

#[test]
fn pretraces_list_branch_choices() {
    let (_, v) = json(&["pretraces", &path("branchy.lit")]);
    let list = v["pretraces"].as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[0]["branches"][0]["taken"], true);
    assert_eq!(list[1]["branches"][0]["taken"], false);
}

#[test]
fn meta_commands_over_files() {
    let (code, out) = run(&["meta", "weak", "sc_rr", "sc", &path("mp.lit"), &path("sb.lit")]);
    assert_eq!(code, 0, "{out}");
    let (code, v) = json(&["meta", "weak", "sc", "sc_rr", &path("mp.lit")]);
    assert_eq!(code, 1);
    assert_eq!(v["counterexamples"][0]["outcome"], "a=1 b=0");
    let (code, v) = json(&["meta", "complete", "tso", "sc", &path("inline4.lit"), "--effects", "inline"]);
    assert_eq!(code, 1);
    assert!(v["counterexamples"].as_array().unwrap().iter().any(|f| f["detail"] == "inline 3 1"));
    let (code, _) = run(&["meta", "sound-rr", "--model", "sc_rr", "--threads", "2", "--events", "4", "--locations", "2"]);
    assert_eq!(code, 0);
    let (code, _) = run(&["meta", "sound-rr", "--threads", "2", "--events", "4", "--locations", "2", "--jobs", "2"]);
    assert_eq!(code, 1);
}
