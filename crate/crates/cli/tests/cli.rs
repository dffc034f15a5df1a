use serde_json::Value;
use std::path::PathBuf;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../core/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> tdw_cli::Outcome {
    let mut full = vec!["tdw".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    tdw_cli::run(full)
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    (out.code, serde_json::from_str(&out.stdout).expect("valid json"))
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn rank_of_four_x() {
    let (code, v) = json(&["rank", &fixture("fig1.tdc"), "--divisor", "D4x", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "rank");
    assert_eq!(v["result"]["rank"], 2);
    assert_eq!(v["result"]["degree"], 4);
    assert!(v["timings"]["total_ms"].is_number());
}

#[test]
fn riemann_roch_check() {
    let out = run(&["check", "rr", &fixture("theta.tdc"), "--divisor", "K"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("pass"));
    let out = run(&["check", "clifford", &fixture("fig1.tdc"), "--divisor", "D4x"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn banana_bn_rank() {
    let (code, v) = json(&["bn", &fixture("b4.tdc"), "--d", "2", "--r", "1", "--refine", "2", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["rho"], 0);
    assert_eq!(v["result"]["exact"], true);
}

#[test]
fn hyperelliptic_exit_codes() {
    assert_eq!(run(&["hyperelliptic", &fixture("theta.tdc")]).code, 0);
    assert_eq!(run(&["hyperelliptic", &fixture("k4.tdc")]).code, 1);
}

#[test]
fn equivalence_and_rigidity() {
    let out = run(&["equiv", &fixture("fig1.tdc"), "--divisor", "P1Q1", "--divisor", "P1Q1"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "equivalent"));
    let out = run(&["rigid", &fixture("theta.tdc"), "--divisor", "V1"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "rigid"));
    let out = run(&["rigid", &fixture("b4.tdc"), "--divisor", "G"]);
    assert_eq!((out.code, out.stdout.trim()), (0, "not rigid"));
}

#[test]
fn decompose_four_x() {
    let (code, v) = json(&["decompose", &fixture("fig1.tdc"), "--divisor", "D4x", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["rank"], 2);
}

#[test]
fn parse_errors_are_usage_errors() {
    let dir = std::env::temp_dir().join(format!("tdw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tdc");
    std::fs::write(&bad, "complex X {\n  vertex v genus 2 ;\n}\n").unwrap();
    let out = run(&["rank", bad.to_str().unwrap(), "--divisor", "K"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains(":2:"), "{}", out.stderr);
    assert_eq!(run(&["rank", "/nonexistent/file.tdc"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["rank", &fixture("fig1.tdc"), "--divisor", "Nope"]).code, 2);
}

#[test]
fn witness_is_seed_deterministic() {
    let args = ["witness", &fixture("fig1.tdc"), "--divisor", "D4x", "--r", "2", "--seed", "7", "--json"];
    let (c1, a) = json(&args);
    let (c2, b) = json(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(strip_timings(a), strip_timings(b));
}
