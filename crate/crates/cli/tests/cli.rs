use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pprop::graph::{Corolla, PlanarGraph};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pprop"))
}

fn algebra(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../algebras").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn dim_d1(name: &str) -> u64 {
    let out = run(&["dims", "--algebra", algebra(name).to_str().unwrap(), "--order", "1"]);
    assert!(out.status.success());
    report(&out)["result"]["dim"].as_u64().unwrap()
}

#[test]
fn first_order_dimensions() {
    assert_eq!(dim_d1("k2"), 0);
    assert_eq!(dim_d1("dualnum"), 1);
    assert_eq!(dim_d1("m2"), 3);
}

#[test]
fn reports_are_byte_identical_and_record_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let alg = algebra("dualnum");
    let mut texts = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("r{k}.json"));
        let out = run(&["verify", "--algebra", alg.to_str().unwrap(), "--seed", "17", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let v: Value = serde_json::from_slice(&texts[0]).unwrap();
    assert_eq!(v["header"]["seed"], 17);
    assert_eq!(v["header"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["result"]["all_pass"], true);
}

#[test]
fn algebra_hash_ignores_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let pretty = algebra("m2");
    let compact = dir.path().join("m2.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&pretty).unwrap()).unwrap();
    std::fs::write(&compact, serde_json::to_string(&v).unwrap()).unwrap();
    let hash = |p: &Path| report(&run(&["dims", "--algebra", p.to_str().unwrap(), "--order", "0"]))["header"]["algebra_sha256"].clone();
    assert_eq!(hash(&pretty), hash(&compact));
    assert_eq!(hash(&pretty).as_str().unwrap().len(), 64);
}

const NON_ASSOCIATIVE: &str = r#"{
  "dim": 3, "basis": ["1", "x", "y"], "unit": ["1", "0", "0"],
  "mult": [
    [["1","0","0"], ["0","1","0"], ["0","0","1"]],
    [["0","1","0"], ["0","0","1"], ["0","0","0"]],
    [["0","0","1"], ["0","1","0"], ["0","0","0"]]
  ]
}"#;

#[test]
fn exit_codes_and_no_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, NON_ASSOCIATIVE).unwrap();
    let target = dir.path().join("report.json");

    let out = run(&["dims", "--algebra", bad.to_str().unwrap(), "--order", "1", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());

    let out = run(&["verify", "--algebra", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = report(&out);
    let axioms = &v["result"]["checks"][0];
    assert_eq!(axioms["name"], "algebra_axioms");
    assert_eq!(axioms["pass"], false);
    assert!(axioms["detail"].as_str().unwrap().contains("(x, x, x)"), "{axioms}");

    let out = run(&["dims", "--algebra", algebra("m2").to_str().unwrap(), "--order", "2", "--grade", "7"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn normal_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [("a#1,1 * b#1,1", "a#1,1 * u . u * b#1,1\n"), ("u . u", "u\n")];
    for (i, (input, expected)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("e{i}.txt"));
        std::fs::write(&path, input).unwrap();
        let out = run(&["normalize", path.to_str().unwrap()]);
        assert!(out.status.success());
        assert_eq!(String::from_utf8(out.stdout).unwrap(), *expected);
    }
    let path = dir.path().join("broken.txt");
    std::fs::write(&path, "a#1,1 * (b#1,1").unwrap();
    let out = run(&["normalize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at byte"));
}

#[test]
fn graph_command() {
    let dir = tempfile::tempdir().unwrap();
    let crossing = dir.path().join("crossing.json");
    std::fs::write(&crossing, serde_json::to_string(&PlanarGraph::crossing()).unwrap()).unwrap();
    let out = run(&["graph", crossing.to_str().unwrap(), "--backtrack-planarity"]);
    assert_eq!(out.status.code(), Some(1));
    let v = report(&out);
    assert_eq!(v["result"]["planar"], false);
    assert_eq!(v["result"]["backtrack_agrees"], true);
    assert!(!v["result"]["frontier_trace"].as_array().unwrap().is_empty());

    let pair = PlanarGraph::vertical_pair(Corolla { n_in: 3, n_out: 1, mark: 0 }, Corolla { n_in: 1, n_out: 3, mark: 0 }).unwrap();
    let path = dir.path().join("pair.json");
    std::fs::write(&path, serde_json::to_string(&pair).unwrap()).unwrap();
    let out = run(&["graph", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = report(&out);
    assert_eq!(v["result"]["order"], serde_json::json!([0, 1]));
    assert_eq!(v["result"]["genus"]["genus"], 2);
}

#[test]
fn solve_symbol_compose() {
    let dir = tempfile::tempdir().unwrap();
    let alg = algebra("m2");
    let alg = alg.to_str().unwrap();
    let v = report(&run(&["solve", "--algebra", alg, "--order", "1"]));
    let basis = v["result"]["basis"].as_array().unwrap();
    assert_eq!(basis.len(), 3);
    let p = dir.path().join("p.json");
    std::fs::write(&p, serde_json::to_string(&basis[0]).unwrap()).unwrap();

    let s = report(&run(&["symbol", p.to_str().unwrap()]));
    assert_eq!(s["result"]["shape"], serde_json::json!([1]));
    assert_eq!(s["result"]["components"], basis[0]["components"]);

    let d = report(&run(&["compose", "--mode", "d", "--algebra", alg, p.to_str().unwrap(), p.to_str().unwrap()]));
    let terms = d["result"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["shape"], serde_json::json!([2]));
    let v2 = report(&run(&["compose", "--mode", "v", "--algebra", alg, p.to_str().unwrap(), p.to_str().unwrap()]));
    assert_eq!(v2["result"]["terms"], d["result"]["terms"]);
    let h = report(&run(&["compose", "--mode", "h", "--algebra", alg, p.to_str().unwrap(), p.to_str().unwrap()]));
    assert_eq!(h["result"]["terms"][0]["shape"], serde_json::json!([1, 1]));
}

#[test]
fn automorphism_commands() {
    let alg = algebra("m2");
    let out = run(&["aut-build", "--algebra", alg.to_str().unwrap(), "--letters", "2", "--order", "3", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = report(&out);
    assert_eq!(v["result"]["valid"], true);
    assert_eq!(v["result"]["double_derivations"], 12);
    assert_eq!(v["result"]["family"]["N"], 3);

    let out = run(&["aut-probe", "--algebra", alg.to_str().unwrap(), "--order", "1"]);
    assert!(out.status.success());
    let v = report(&out);
    assert_eq!(v["result"]["all_spanned"], true);
    assert_eq!(v["result"]["smoothness"], "projective (separability idempotent)");

    let out = run(&["aut-probe", "--algebra", algebra("k2").to_str().unwrap()]);
    assert!(out.status.success());
}
