use std::path::PathBuf;
use std::process::{Command, Output};

use bitour_cli::{generate, parse_edge_list, write_edge_list, GenKind};
use serde_json::Value;

fn bitour(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitour")).args(args).output().unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bitour-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn gen_to(dir: &PathBuf, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    assert_eq!(bitour(&all).status.code(), Some(0));
    path.to_str().unwrap().to_string()
}

#[test]
fn edge_lists_round_trip() {
    for (kind, n) in [(GenKind::Blowup, 3), (GenKind::Flipped, 2), (GenKind::Random, 4), (GenKind::Tripartite, 2)] {
        let d = generate(kind, n, 5, 1).unwrap();
        let text = write_edge_list(&d);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(back.classes(), d.classes());
        assert_eq!(back.arcs(), d.arcs());
        assert_eq!(write_edge_list(&back), text);
    }
}

#[test]
fn parse_errors_name_the_line() {
    let e = parse_edge_list("bitour 2 2\nclass 0 1\nclass 1 2\n0 0\n").unwrap_err();
    assert_eq!(e.line, 4);
    assert!(e.to_string().starts_with("line 4:"));
    let e = parse_edge_list("").unwrap_err();
    assert_eq!(e.to_string(), "empty input");
}

#[test]
fn decompose_then_verify() {
    let dir = scratch("verify");
    let input = gen_to(&dir, "f.txt", &["--kind", "flipped", "--n", "2"]);
    let report = dir.join("r.json");
    let out = bitour(&["run", "--task", "decompose", "--input", &input, "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["status"], "complete");
    assert_eq!(v["cycles"].as_array().unwrap().len(), 2);
    for key in ["instance_hash", "task", "params", "certificate", "systems", "diagnostics", "partition"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }

    let out = bitour(&["run", "--task", "verify", "--input", &input, "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // drop one arc from the first cycle
    let mut bad = v.clone();
    bad["cycles"][0].as_array_mut().unwrap().pop();
    let tampered = dir.join("bad.json");
    std::fs::write(&tampered, serde_json::to_string(&bad).unwrap()).unwrap();
    let out = bitour(&["run", "--task", "verify", "--input", &input, "--report", tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let garbage = dir.join("garbage.txt");
    std::fs::write(&garbage, "not an edge list\n").unwrap();
    assert_eq!(bitour(&["run", "--task", "partition", "--input", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bitour(&["gen", "--kind", "tripartite", "--n", "1"]).status.code(), Some(3));
    let tri = gen_to(&dir, "t.txt", &["--kind", "tripartite", "--n", "2"]);
    assert_eq!(bitour(&["run", "--task", "decompose", "--input", &tri]).status.code(), Some(3));
    assert_eq!(bitour(&["run", "--task", "nonsense", "--input", &tri]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn several_inputs_write_a_directory() {
    let dir = scratch("batch");
    let a = gen_to(&dir, "a.txt", &["--kind", "blowup", "--n", "2"]);
    let b = gen_to(&dir, "b.txt", &["--kind", "random", "--n", "3", "--flips", "4", "--seed", "2"]);
    let out_dir = dir.join("reports");
    let out = bitour(&["run", "--task", "classify", "--input", &a, &b, "--jobs", "2", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ra: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("a.json")).unwrap()).unwrap();
    assert_eq!(ra["certificate"]["kind"], "close");
    assert!(out_dir.join("b.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}
