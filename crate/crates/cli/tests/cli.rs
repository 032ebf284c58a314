use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_propermaps")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(v["schema_version"], 1);
    v
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn classify_answers_both_ways() {
    let v = report(&["classify", &path("two_loop_ray.aut"), &path("three_loop_ray.aut")]);
    assert_eq!(v["result"]["answer"], "YES");
    let v = report(&["classify", &path("two_loop_ray.aut"), &path("two_loop_ray.aut")]);
    assert_eq!(v["result"]["answer"], "YES");
    let v = report(&["classify", &path("ray.aut"), &path("cantor.aut")]);
    assert_eq!(v["result"]["answer"], "NO");
}

#[test]
fn intersect_writes_the_components() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let status = run(&["intersect", &path("ab.ffs"), &path("a_cbc.ffs"), "--out", &out]).status;
    assert!(status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["ranks"], serde_json::json!([1, 1]));
    let ffs = std::fs::read_to_string(dir.path().join("intersection.ffs")).unwrap();
    assert_eq!(ffs.matches("---").count(), 1);

    let v = report(&["intersect", &path("ab.ffs"), &path("c.ffs")]);
    assert_eq!(v["result"]["components"], 0);
    let v = report(&["intersect", &path("ab.ffs"), &path("ab.ffs")]);
    assert_eq!(v["result"]["ranks"], serde_json::json!([2]));
}

#[test]
fn check_id_verdicts() {
    let v = report(&["check-id", &path("shift.map")]);
    let summary = v["result"]["summary"].as_str().unwrap();
    assert!(summary.starts_with("NO: loop 0:0"), "{summary}");
    let v = report(&["check-id", &path("identity.map")]);
    assert!(v["result"]["summary"].as_str().unwrap().starts_with("CERTIFIED_YES"));
    let v = report(&["check-id", &path("banded.map")]);
    assert_eq!(v["result"]["verdict"]["UNKNOWN"]["depth"], 2);
}

#[test]
fn realize_tree_swap() {
    let v = report(&["realize", "tree", &path("cantor.aut"), &path("swap.act")]);
    let perms = v["result"]["action"].as_array().unwrap();
    assert_eq!(perms.len(), 2);
    assert_ne!(perms[0], perms[1]);
    assert!(v["result"]["telescope_dot"].as_str().unwrap().starts_with("graph"));
}

#[test]
fn realize_core_flip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let args = ["realize", "core", &path("loop_ray.aut"), &path("flip.act"), "--depth", "50", "--out", &out];
    assert!(run(&args).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["result"]["kind"], "core");
    assert_eq!(v["result"]["ffs_ranks"].as_array().unwrap().len(), 3);
    for f in ["graph.dot", "t.dot", "tstar.dot"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let first = std::fs::read(dir.path().join("report.json")).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("report.json")).unwrap(), "reruns must be identical");
}

#[test]
fn realize_general_with_the_trivial_group() {
    let v = report(&["realize", "general", &path("cantor.aut"), &path("trivial.act")]);
    assert_eq!(v["result"]["kind"], "general");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["classify", &path("ray.aut")]).status.code(), Some(4));
    assert_eq!(run(&["classify", &path("ray.aut"), &path("missing.aut")]).status.code(), Some(4));
    assert_eq!(run(&["classify", &path("ray.aut"), &path("ab.ffs")]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // the default cover does not fit at depth 4
    assert_eq!(run(&["realize", "core", &path("loop_ray.aut"), &path("flip.act")]).status.code(), Some(4));
    // no loops means no realization at such a small radius
    let out = run(&["realize", "general", &path("loop_ray.aut"), &path("flip.act"), "--depth", "50", "--cover", "0-24,2-48,26-50", "--radius", "0"]);
    assert!(matches!(out.status.code(), Some(0 | 3)), "{}", String::from_utf8_lossy(&out.stderr));
    let out = Command::new(env!("CARGO_BIN_EXE_propermaps"))
        .args(["classify", &path("ray.aut"), &path("ray.aut")])
        .env("PROPERMAPS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error in config"));
}
