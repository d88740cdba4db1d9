use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nodecomp::structure::Structure;

fn nodecomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodecomp")).args(args).env_remove("NODECOMP_ENUM_CAP").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn construct_writes_structure_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = nodecomp(&["construct", "--n", "7", "--tau", "3", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let s = Structure::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s.complexity(), 18);
    assert!(s.latency() <= 3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["complexity"], 18);
    assert_eq!(manifest["case"], "E5");
}

#[test]
fn construct_is_deterministic() {
    let a = nodecomp(&["construct", "--n", "23", "--tau", "6"]);
    let b = nodecomp(&["construct", "--n", "23", "--tau", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn infeasible_latency_exits_two() {
    let o = nodecomp(&["construct", "--n", "9", "--tau", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible: tau < ceil(log(n-1))"));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(nodecomp(&["construct", "--n", "seven", "--tau", "3"]).status.code(), Some(1));
    assert_eq!(nodecomp(&["construct", "--n", "1", "--tau", "3"]).status.code(), Some(1));
    assert_eq!(nodecomp(&["table", "--n-max", "1"]).status.code(), Some(1));
}

#[test]
fn missing_file_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodecomp(&["validate", "--in", path(&dir.path().join("absent.json"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_rejects_a_broken_structure() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    // y_1 labelled on a node folding x_1 and x_2
    let text = r#"{"format":"mps-structure/v1","n":3,"nodes":[
        {"kind":"input","id":0,"index":1},
        {"kind":"input","id":1,"index":2},
        {"kind":"input","id":2,"index":3},
        {"kind":"comp","id":3,"operands":[0,1],"output_index":1},
        {"kind":"comp","id":4,"operands":[0,2],"output_index":2},
        {"kind":"comp","id":5,"operands":[1,2],"output_index":3}]}"#;
    fs::write(&f, text).unwrap();
    let o = nodecomp(&["validate", "--in", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("wrong-output-leaves"), "{}", stdout(&o));
}

#[test]
fn eval_echoes_seed_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    assert_eq!(nodecomp(&["construct", "--n", "12", "--tau", "5", "--out", path(&out)]).status.code(), Some(0));
    for op in ["min", "max", "sum", "xor"] {
        let o = nodecomp(&["eval", "--in", path(&out), "--op", op, "--random", "5", "--seed", "42"]);
        assert_eq!(o.status.code(), Some(0), "{op}");
        let text = stdout(&o);
        assert!(text.starts_with("seed: 42\n"));
        assert!(text.contains("fold check: ok"));
    }
    let o = nodecomp(&["eval", "--in", path(&out), "--op", "sum", "--inputs", "1,2,3,4,5,6,7,8,9,10,11,-12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("y = [53, 52, 51, 50, 49, 48, 47, 46, 45, 44, 43, 66]"));
}

#[test]
fn eval_with_lookup_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let lut = dir.path().join("lut.json");
    // min on the alphabet {0, 1, 2}
    fs::write(&lut, r#"{"name":"min3","table":[[0,0,0],[0,1,1],[0,1,2]]}"#).unwrap();
    assert_eq!(nodecomp(&["construct", "--n", "6", "--tau", "3", "--out", path(&out)]).status.code(), Some(0));
    let o = nodecomp(&["eval", "--in", path(&out), "--op", "lut", "--lut", path(&lut), "--random", "20", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    // boolean or
    fs::write(&lut, r#"{"table":[[0,1],[1,1]],"name":"or"}"#).unwrap();
    let ok = nodecomp(&["eval", "--in", path(&out), "--op", "lut", "--lut", path(&lut), "--random", "1", "--seed", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    // a AND NOT b: not commutative
    fs::write(&lut, r#"{"table":[[0,0],[1,0]]}"#).unwrap();
    let bad = nodecomp(&["eval", "--in", path(&out), "--op", "lut", "--lut", path(&lut), "--random", "1", "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn table_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = nodecomp(&["table", "--n-max", "64", "--compare-golden", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().any(|l| l == "7,3,4,18,15,15,15,15,19"), "{csv}");
    assert_eq!(csv.lines().count(), 64);
    let json = nodecomp(&["table", "--n-max", "8", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 7);
}

#[test]
fn enumerate_counts_and_cap() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodecomp(&["enumerate", "--n", "6", "--kind", "co", "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "105");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 105);

    let capped = Command::new(env!("CARGO_BIN_EXE_nodecomp"))
        .args(["enumerate", "--n", "6", "--kind", "ttree", "--out-dir", path(dir.path())])
        .env("NODECOMP_ENUM_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
}

#[test]
fn export_round_trip_preserves_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let dot = dir.path().join("s.dot");
    let again = dir.path().join("again.json");
    assert_eq!(nodecomp(&["construct", "--n", "10", "--tau", "4", "--out", path(&out)]).status.code(), Some(0));
    let o = nodecomp(&["export", "--in", path(&out), "--dot-out", path(&dot), "--json-out", path(&again)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let a = Structure::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let b = Structure::from_json(&fs::read_to_string(&again).unwrap()).unwrap();
    assert!(a.same_as(&b));
    assert_eq!(nodecomp(&["validate", "--in", path(&again)]).status.code(), Some(0));
}

#[test]
fn export_ttree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nodecomp(&["enumerate", "--n", "4", "--kind", "ttree", "--out-dir", path(dir.path())]).status.code(), Some(0));
    let first = dir.path().join("ttree-4-000001.json");
    let dot = dir.path().join("t.dot");
    assert_eq!(nodecomp(&["export", "--in", path(&first), "--dot-out", path(&dot)]).status.code(), Some(0));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("graph"));
}

#[test]
fn oracle_checks() {
    let o = nodecomp(&["oracle", "--check", "bruteforce", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["min_complexity"], 6);
    assert_eq!(nodecomp(&["oracle", "--check", "co-enum", "--n", "5"]).status.code(), Some(0));
    assert_eq!(nodecomp(&["oracle", "--check", "dp-small", "--n", "6"]).status.code(), Some(0));
    assert_eq!(nodecomp(&["oracle", "--check", "bruteforce", "--n", "7"]).status.code(), Some(1));
}
