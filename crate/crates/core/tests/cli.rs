use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn qunit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qunit")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn entries(v: &Value) -> Vec<f64> {
    v["data"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn assert_close(got: &[f64], want: &[f64], eps: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= eps, "{got:?} vs {want:?}");
    }
}

#[test]
fn parsum_writes_result_file() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"dim": 2, "data": [2, 0, 0, 4]}"#);
    let out_file = dir.path().join("r.json");
    let out = qunit(&["--out", s(&out_file), "parsum", s(&a), s(&a)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_file).unwrap()).unwrap();
    assert_close(&entries(&r), &[1.0, 0.0, 0.0, 2.0], 1e-12);
}

#[test]
fn short_golden_case_in_json() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"dim": 2, "data": [1, 0, 0, 0]}"#);
    let b = write(dir.path(), "b.json", r#"{"dim": 2, "data": [2, 1, 1, 1]}"#);
    let out = qunit(&["--json", "short", s(&a), s(&b)]);
    assert!(out.status.success());
    let v = json_out(&out);
    assert_close(&entries(&v["result"]), &[1.0, 0.0, 0.0, 0.0], 1e-10);
    assert!(v["agreement"]["aux_schur"].as_f64().unwrap() < 1e-7);
}

#[test]
fn pardiff_unsolvable_exits_with_error() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.json", r#"{"dim": 2, "data": [1, 0, 0, 1]}"#);
    let out = qunit(&["pardiff", s(&i), s(&i)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn lebesgue_singular_part_file() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"dim": 2, "data": [1, 0, 0, 0]}"#);
    let b = write(dir.path(), "b.json", r#"{"dim": 2, "data": [2, 1, 1, 1]}"#);
    let sing = dir.path().join("sing.json");
    let out = qunit(&["--json", "lebesgue", s(&a), s(&b), "--singular-out", s(&sing)]);
    assert!(out.status.success());
    let v = json_out(&out);
    assert_eq!(v["unique"], Value::Bool(true));
    let part: Value = serde_json::from_str(&std::fs::read_to_string(sing).unwrap()).unwrap();
    assert_close(&entries(&part), &[1.0, 1.0, 1.0, 1.0], 1e-10);
}

#[test]
fn quasiunit_and_infimum_verdicts() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", r#"{"dim": 2, "data": [1, 0, 0, 0]}"#);
    let b = write(dir.path(), "b.json", r#"{"dim": 2, "data": [1, 0, 0, 1]}"#);
    let v = json_out(&qunit(&["--json", "quasiunit", s(&a), s(&b)]));
    assert_eq!(v["verdict"], Value::Bool(true));

    let x = write(dir.path(), "x.json", r#"{"dim": 2, "data": [2, 0, 0, 1]}"#);
    let y = write(dir.path(), "y.json", r#"{"dim": 2, "data": [1, 0, 0, 2]}"#);
    let v = json_out(&qunit(&["--json", "infimum", s(&x), s(&y)]));
    assert_eq!(v["exists"], Value::Bool(false));
}

#[test]
fn galois_adjunction_and_closure() {
    let dir = TempDir::new().unwrap();
    let w = write(dir.path(), "w.json", r#"{"dim": 2, "space_dim": 2, "data": [1, 0, 0, 0]}"#);
    let u = write(dir.path(), "u.json", r#"{"dim": 2, "data": [0, 0, 0, 5]}"#);
    let v = write(dir.path(), "v.json", r#"{"dim": 2, "data": [0.75, 0, 0, 0]}"#);
    let out = qunit(&["--json", "galois", "--ref", s(&w), "--check", "adjunction", s(&u), s(&v)]);
    assert!(out.status.success());
    let j = json_out(&out);
    assert_eq!((j["left"].clone(), j["right"].clone()), (Value::Bool(false), Value::Bool(false)));

    let t = write(dir.path(), "t.json", r#"{"dim": 2, "data": [2, 0, 0, 3]}"#);
    let j = json_out(&qunit(&["--json", "galois", "--ref", s(&w), "--check", "closure", s(&t)]));
    assert_close(&entries(&j), &[2.0, 0.0, 0.0, 0.0], 1e-9);
}

#[test]
fn rejects_malformed_input() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dim": 2, "data": [1, 2, 3]}"#);
    let asym = write(dir.path(), "asym.json", r#"{"dim": 2, "data": [1, 2, 0, 1]}"#);
    assert_eq!(qunit(&["parsum", s(&bad), s(&bad)]).status.code(), Some(2));
    assert_eq!(qunit(&["parsum", s(&asym), s(&asym)]).status.code(), Some(2));
}

#[test]
fn selftest_subset_and_failures_dir() {
    let dir = TempDir::new().unwrap();
    let out = qunit(&[
        "--json",
        "selftest",
        "--trials",
        "5",
        "--suites",
        "parsum.commutative,short.triple_agreement",
        "--failures-dir",
        s(dir.path()),
    ]);
    assert!(out.status.success());
    let reports = json_out(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["failed"] == 0 && r["passed"] == 5));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let out = qunit(&["selftest", "--suites", "no.such_suite"]);
    assert_eq!(out.status.code(), Some(2));
}
