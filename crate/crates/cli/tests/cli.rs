use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn advgap(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_advgap"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: Option<&str>) -> String {
    let out = advgap(args, stdin);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).expect("valid JSON")
}

fn rational(v: &Value) -> (i64, i64) {
    let s = v.as_str().expect("rational string");
    match s.split_once('/') {
        Some((a, b)) => (a.parse().unwrap(), b.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    }
}

#[test]
fn pentagon_gap_is_one_tenth() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.json");
    std::fs::write(&path, ok(&["construct", "figure", "pentagon"], None)).unwrap();
    let r = json(&ok(&["analyze", path.to_str().unwrap()], None));
    assert_eq!(r["report"]["gap"], "1/10");
    assert_eq!(r["report"]["ip"], "2/5");
    assert_eq!(r["report"]["fp_h"], "1/2");
    assert_eq!(r["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn pendant_has_no_gap() {
    let data = ok(&["construct", "figure", "pendant"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    assert_eq!(r["report"]["gap"], "0");
    assert_eq!(r["report"]["conformal"], true);
    assert_eq!(r["report"]["perfect"]["status"], "perfect");
}

#[test]
fn basis_pipeline() {
    let data = ok(&["construct", "basis", "--k", "3"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    assert_eq!(r["report"]["gap"], "1/6");
    assert_eq!(r["report"]["conformal"], false);
    assert_eq!(r["report"]["conformal_minimal_witness"].as_array().unwrap().len(), 3);
}

#[test]
fn fibration_gap_is_at_least_seven_thirtieths() {
    let data = ok(&["construct", "fibration", "--base", "c5", "--t", "1"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    let (a, b) = rational(&r["report"]["gap"]);
    assert!(30 * a >= 7 * b, "gap {a}/{b}");
    assert_eq!(r["certificates"]["integral"]["proven_optimal"], true);
}

#[test]
fn antihole_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c7complement.json");
    std::fs::write(&path, ok(&["construct", "fibration", "--base", "c7complement", "--t", "0", "--graph-only"], None))
        .unwrap();
    let r = json(&ok(&["check", "--graph", path.to_str().unwrap()], None));
    assert_eq!(r["perfect"]["status"], "not_perfect");
    assert_eq!(r["perfect"]["kind"], "anti_hole");
    assert_eq!(r["perfect"]["cycle"].as_array().unwrap().len(), 7);
}

#[test]
fn sup_norm_antihole_dataset() {
    let data = ok(&["construct", "figure", "antihole"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    assert_eq!(r["structures"]["conflict_edges"], 14);
    assert_eq!(r["report"]["perfect"]["kind"], "anti_hole");
}

#[test]
fn embed_round_trips_through_analyze() {
    let data = ok(&["embed", "--graph", "c5", "--norm", "2"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    assert_eq!(r["structures"]["conflict_edges"], 5);
    let data = ok(&["construct", "embed", "--graph", "c5", "--norm", "inf"], None);
    let r = json(&ok(&["analyze", "-"], Some(&data)));
    assert_eq!(r["structures"]["conflict_edges"], 5);
}

#[test]
fn solve_hypergraph() {
    let input = r#"{"n": 5, "max_edges": [[0,1],[1,2],[2,3],[3,4],[0,4]], "weights": ["1/5","1/5","1/5","1/5","1/5"]}"#;
    let r = json(&ok(&["solve", "-"], Some(input)));
    assert_eq!(r["fp"], "1/2");
    assert_eq!(r["ip"], "2/5");
    assert_eq!(r["q_frac"].as_array().unwrap().len(), 5);
    assert_eq!(r["q_int"].as_array().unwrap().iter().filter(|v| *v == "1").count(), 2);
    assert_eq!(r["dual"].as_array().unwrap().len(), 5);
}

#[test]
fn classify_reports_witnessed_accuracy() {
    let data = ok(&["construct", "figure", "pentagon"], None);
    let r = json(&ok(&["classify", "-"], Some(&data)));
    assert_eq!(r["witnessed_accuracy"], "1/2");
    let r = json(&ok(&["classify", "-", "--packing", "integral"], Some(&data)));
    assert_eq!(r["witnessed_accuracy"], "2/5");
    assert_eq!(r["points"].as_array().unwrap().len(), 5);
}

#[test]
fn classify_rejects_infeasible_packing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    let q = dir.path().join("q.json");
    std::fs::write(&data, ok(&["construct", "figure", "pentagon"], None)).unwrap();
    std::fs::write(&q, r#"["1","1","0","0","0"]"#).unwrap();
    let out = advgap(&["classify", data.to_str().unwrap(), "--packing", q.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let data = ok(&["construct", "random", "--seed", "3", "--n", "9"], None);
    assert_eq!(data, ok(&["construct", "random", "--seed", "3", "--n", "9"], None));
    assert_eq!(ok(&["analyze", "-"], Some(&data)), ok(&["analyze", "-"], Some(&data)));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let printed = ok(&["construct", "basis", "--k", "4", "--output", path.to_str().unwrap()], None);
    assert!(printed.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("sqrt("));
}

#[test]
fn empty_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    assert_eq!(advgap(&["analyze", path.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_two() {
    assert_eq!(advgap(&["analyze", "--frobnicate", "-"], None).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_four() {
    let data = ok(&["construct", "fibration", "--base", "c5", "--t", "1"], None);
    assert_eq!(advgap(&["analyze", "-", "--node-budget", "1"], Some(&data)).status.code(), Some(4));
}
