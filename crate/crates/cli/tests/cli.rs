use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn toral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toral")).args(args).env_remove("TORAL_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_pair_p2_is_all_true() {
    let out = toral(&["verify-pair", "P2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.split_whitespace().eq(["all_ok", "true"])), "{text}");
    assert!(text.starts_with("# P2 seed 0"));
}

#[test]
fn index_of_three_antichain() {
    let out = toral(&["index", arg(&data("antichain3.json")), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["index"], 2);
    assert_eq!(v["seed"], 0);
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_toral"))
        .args(["--json", "index", arg(&data("antichain3.json"))])
        .env("TORAL_SEED", "41")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 41);
}

#[test]
fn catalog_emit_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = toral(&["catalog", "P2", "--emit", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let poset = dir.path().join("P2.poset.json");
    let functional = dir.path().join("P2.functional.json");
    let from_files = json(&toral(&["--json", "verify-pair", arg(&poset), arg(&functional)]));
    let from_catalog = json(&toral(&["--json", "verify-pair", "P2"]));
    assert_eq!(from_files["all_ok"], true);
    for key in ["p1_ok", "p2_ok", "p3_ok", "f1_ok", "f2_ok", "f3_ok", "f4_ok", "frobenius_ok"] {
        assert_eq!(from_files[key], from_catalog[key], "{key}");
    }
}

#[test]
fn build_worked_example() {
    let out = toral(&["--json", "build", arg(&data("worked_example.seq")), "--emit", "all"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["index_by_formula"], 0);
    assert_eq!(v["frobenius"], true);
    assert_eq!(v["poset"]["elements"].as_array().unwrap().len(), 13);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let f = dir.path().join("f.json");
    let emit = |what: &str, to: &Path| {
        let out = toral(&["build", arg(&data("worked_example.seq")), "--emit", what]);
        std::fs::write(to, out.stdout).unwrap();
    };
    emit("poset", &p);
    emit("functional", &f);
    assert_eq!(json(&toral(&["--json", "index", arg(&p)]))["index"], 0);
    let s = json(&toral(&["--json", "spectrum", arg(&p), arg(&f)]));
    assert_eq!(s["binary"], true);
    assert_eq!(s["zero_mult"], s["one_mult"]);
}

#[test]
fn homology_output_shape() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"elements":["a","b","c","d"],"relations":[["a","b"],["b","c"],["b","d"]]}"#).unwrap();
    let out = toral(&["--json", "homology", arg(&p), "--max-dim", "2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"betti":[1,0,0],"euler":1,"faces":[4,5,2]}"#);
}

#[test]
fn scan_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("r.jsonl");
    let out = toral(&["--json", "scan", "--n", "4", "--height", "2", "--out", arg(&out_file)]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["counterexamples"].as_array().unwrap().len(), 0);
    let text = std::fs::read_to_string(&out_file).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines[0].get("config").is_some());
    // connected posets on 2, 3, 4 elements of height at most 2
    let posets: u64 = summary["by_size"].as_array().unwrap().iter().map(|r| r["posets"].as_u64().unwrap()).sum();
    assert_eq!(lines.len() as u64 - 1, posets);
}

#[test]
fn usage_and_domain_errors() {
    assert_eq!(toral(&["index"]).status.code(), Some(2));
    assert_eq!(toral(&["verify-pair", "P4"]).status.code(), Some(2));
    assert_eq!(toral(&["scan", "--n", "8"]).status.code(), Some(2));
    assert_eq!(toral(&["index", "/nonexistent/poset.json"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cycle.json");
    std::fs::write(&p, r#"{"elements":["a","b"],"relations":[["a","b"],["b","a"]]}"#).unwrap();
    let out = toral(&["index", arg(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle"));
}
