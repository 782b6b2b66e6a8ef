use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toricmono"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toricmono-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn run(args: &[&str]) -> (Output, Value) {
    let out = bin().args(args).output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, v)
}

#[test]
fn analyze_unit_square() {
    let (out, v) = run(&["analyze", data("unit-square.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["report"]["index"], 1);
    assert_eq!(v["report"]["interior_count"], 0);
    assert_eq!(v["version"], toricmono::VERSION);
    assert_eq!(v["config"]["options"]["tol"], 1e-9);
}

#[test]
fn theorem_check_square() {
    let (out, v) = run(&["theorem-check", data("square5.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["report"]["equal"], true);
    assert_eq!(v["report"]["generated_order"], "20922789888000");
}

#[test]
fn unmet_hypotheses_exit_two() {
    let p = scratch("square2.json", r#"{"vertices": [[0,0],[2,0],[2,2],[0,2]]}"#);
    let (out, v) = run(&["check-hypotheses", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(v["status"], "hypotheses_unmet");
    assert_eq!(v["report"]["hypotheses"]["a"]["holds"], false);
}

#[test]
fn domain_guard_is_a_failure() {
    let (out, _) = run(&["theorem-check", data("square5.json").to_str().unwrap(), "--max-domain", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_polygon_reports_position() {
    let p = scratch("broken.json", "{\"vertices\": [[0,0],\n [1,0], [0,x]]}");
    let (out, _) = run(&["analyze", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column"), "{err}");
}

#[test]
fn demo_reproduces_fibers() {
    let (out, v) = run(&["demo-figure1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &v["report"];
    assert_eq!(r["total"], 12);
    assert_eq!(r["fiber_sizes"], serde_json::json!([5, 5, 2]));
    for k in ["1", "2", "3"] {
        assert!(r["root_lines"][k]["max_distance"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn seeded_runs_are_identical() {
    let args = ["triangle-nodes", "--ell", "4", "--p", "3", "--q", "5", "--random-a", "--seed", "17"];
    let (a, _) = run(&args);
    let (b, _) = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let (c, _) = run(&["triangle-nodes", "--ell", "4", "--p", "3", "--q", "5", "--random-a", "--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn trace_around_discriminant() {
    let (out, v) = run(&["trace", "--ell", "5", "--p", "7", "--q", "6", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let perm: Vec<usize> = serde_json::from_value(v["report"]["permutation"].clone()).unwrap();
    assert_eq!(perm.iter().enumerate().filter(|(i, &j)| *i != j).count(), 2);
    let (out, _) = run(&["trace", "--ell", "2", "--p", "1", "--q", "3", "--k", "1", "--loop", "circle:slot=0,center=1,0.5,radius=0.2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn text_output_to_file() {
    let target = std::env::temp_dir().join(format!("toricmono-out-{}.txt", std::process::id()));
    let out = bin()
        .args(["analyze", data("triangle-576.json").to_str().unwrap(), "--format", "text", "--out", target.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("index: 3"));
    assert!(text.contains("interior_count: 12"));
}

#[test]
fn kite_and_patchwork() {
    let (out, v) = run(&["kite", data("kite.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["report"]["preserves_decoration"], true);
    let (out, v) = run(&["patchwork", data("square5.json").to_str().unwrap(), "--wedge", "0:0,4:0,3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(v["report"]["degeneration"]["consistent"], true);
}
