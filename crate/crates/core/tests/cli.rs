use std::process::Command;

use lowterm::cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_OK};
use lowterm::scenario::builtin_text;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lowterm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn verify_builtin_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (code, out, _) = call(&["verify", "LIB-1", "--json", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("LIB-1 main: pass"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["scenario"], "LIB-1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 4 * 5 + 5);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn verify_variant_reports_four_diagrams() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let (code, out, _) = call(&["verify", "LIB-0", "--variant", "--json", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["scenario"].as_str().unwrap()).collect();
    assert_eq!(names, ["LIB-0", "LIB-0 variant identity", "LIB-0 variant stalk0", "LIB-0 variant zero"]);
}

#[test]
fn scenario_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.scn");
    std::fs::write(&path, builtin_text("LIB-1").unwrap()).unwrap();
    let (code, out, _) = call(&["lowterm", path.to_str().unwrap(), "--t", "1"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("exact at interior nodes: [true, true, true, true, true]"), "{out}");
}

#[test]
fn input_errors_exit_2() {
    let (code, _, err) = call(&["verify", "no-such-file.scn"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("no-such-file.scn"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.scn");
    std::fs::write(&path, "group { family: cyclic; param: 2; }\nnormal { elements: [0; }\n").unwrap();
    let (code, _, err) = call(&["verify", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("2:"), "{err}");
    assert_eq!(call(&["lowterm", "LIB-1", "--t", "4"]).0, EXIT_INPUT);
    assert_eq!(call(&["frobnicate"]).0, EXIT_INPUT);
}

#[test]
fn chase_commands() {
    let (code, out, _) = call(&["chase", "LIB-1", "--position", "left", "--enumerate"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("0 failed"), "{out}");
    let (code, out, _) = call(&["chase", "LIB-1", "--position", "right", "--beta", "0", "--gamma", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("α = [] (certificate valid)"), "{out}");
    let (code, _, err) = call(&["chase", "LIB-1", "--position", "right", "--beta", "1", "--gamma", "0"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("different images"), "{err}");
}

#[test]
fn cohomology_and_ext() {
    let (code, out, _) = call(&["cohomology", "LIB-1", "--degree", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("H^1(G, M) = Z/2"), "{out}");
    let (code, out, _) = call(&["ext", "LIB-2", "--t", "3", "--degree", "2"]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lowterm");
    let ok = Command::new(bin).args(["report", "LIB-0"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let bad = Command::new(bin).args(["report", "missing.scn"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
    assert_ne!(EXIT_FAIL, EXIT_OK);
}
