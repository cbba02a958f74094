use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sunkcost::format::serialize_graph;
use sunkcost::graph::motivating_example;
use sunkcost::scalar::{int, parse, to_f64};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sunkcost"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sunkcost-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn write_scb(dir: &Path) -> PathBuf {
    let path = dir.join("scb.json");
    fs::write(&path, serialize_graph(&motivating_example(&int(1), &int(10)))).unwrap();
    path
}

#[test]
fn eval_motivating_example() {
    let dir = scratch("eval");
    let scb = write_scb(&dir);
    let s = run(&["eval", "--graph", scb.to_str().unwrap(), "--agent", "sophisticated", "--lambda", "1/2"]);
    assert_eq!(s.status.code(), Some(0));
    assert_eq!(field(&stdout(&s), "payoff"), "0");
    let o = run(&["eval", "--graph", scb.to_str().unwrap(), "--agent", "optimal"]);
    assert_eq!(field(&stdout(&o), "payoff"), "1");
    assert_eq!(field(&stdout(&o), "reach_probability"), "1/2");
}

#[test]
fn eval_trace_lists_decisions() {
    let dir = scratch("trace");
    let scb = write_scb(&dir);
    let o = run(&["eval", "--graph", scb.to_str().unwrap(), "--agent", "sophisticated", "--lambda", "1/2", "--trace"]);
    let text = stdout(&o);
    assert!(text.contains("node,sunk,mode,decision,compared"));
    assert!(text.contains("s,0,own,continue,0"));
    assert!(text.contains("u,4,own,continue,-2"));
}

#[test]
fn malformed_input_exits_one() {
    let dir = scratch("bad");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{ \"nodes\": [").unwrap();
    let o = run(&["eval", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let missing = run(&["eval", "--graph", dir.join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
    let neg = run(&["eval", "--graph", write_scb(&dir).to_str().unwrap(), "--lambda", "-1"]);
    assert_eq!(neg.status.code(), Some(1));
}

#[test]
fn state_cap_exits_two() {
    let dir = scratch("cap");
    let scb = write_scb(&dir);
    let o = run(&["eval", "--graph", scb.to_str().unwrap(), "--agent", "sophisticated", "--lambda", "1/2", "--max-states", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state cap"));
}

#[test]
fn gen_tight_fan_sidecar() {
    let dir = scratch("gen-fan");
    let out = dir.join("fan3.json");
    let o = run(&["gen", "tight-fan", "--n", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("fan3.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["lambda"], "15/16");
    let e = run(&["eval", "--graph", out.to_str().unwrap(), "--agent", "sophisticated", "--lambda", "15/16"]);
    assert_eq!(field(&stdout(&e), "payoff"), "0");
}

#[test]
fn gen_three_node_tight_probability() {
    let o = run(&["gen", "three-node-tight", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let g = sunkcost::format::parse_graph(&stdout(&o)).unwrap();
    let edge = g.edges.iter().find(|e| e.from == "s" && e.to == "t").unwrap();
    assert!((to_f64(&edge.prob) - 0.585786).abs() < 1e-6);
}

#[test]
fn gen_random_is_deterministic() {
    let a = run(&["gen", "random", "--seed", "5"]);
    let b = run(&["gen", "random", "--seed", "5"]);
    let c = run(&["gen", "random", "--seed", "6"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_knapsack_metadata() {
    let dir = scratch("gen-ks");
    let out = dir.join("ks.json");
    let o = run(&["gen", "knapsack", "--weights", "1,2", "--capacity", "2", "--lambda", "1/2", "--alpha", "3/4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("ks.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["weights"], serde_json::json!([1, 2]));
    assert_eq!(meta["alpha"], "3/4");
    assert_eq!(meta["tie"], "stop");
    let e = run(&["eval", "--graph", out.to_str().unwrap(), "--agent", "sophisticated", "--lambda", "1/2", "--tie", "stop"]);
    assert_eq!(field(&stdout(&e), "payoff"), "0");
}

#[test]
fn gen_rejects_bad_parameters() {
    assert_eq!(run(&["gen", "tight-fan", "--n", "2"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "edge-cost-tight", "--lambda", "1/2"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "edge-cost-tight", "--lambda", "1/2", "--epsilon", "2"]).status.code(), Some(1));
}

#[test]
fn verify_all_passes() {
    let o = run(&["verify", "all", "--seed", "7", "--count", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("check,graph_ref,lambda,lhs,rhs,holds\n"));
    assert!(!text.lines().skip(1).any(|l| l.ends_with(",false")));
}

#[test]
fn verify_hardness_row_count() {
    let o = run(&["verify", "hardness", "--count", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn verify_fan_has_tight_family_rows() {
    let o = run(&["verify", "fan", "--count", "5"]);
    let text = stdout(&o);
    for n in 3..=50 {
        assert!(text.contains(&format!("tight_fan_identity,tight-fan-{n},")), "n={n}");
    }
}

fn sweep_rows(args: &[&str]) -> Vec<Vec<String>> {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("family,n,lambda,epsilon,pi_o,pi_s,pi_h,p_success,bound_rhs,gap"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_tight_fan_approaches_limit() {
    let rows = sweep_rows(&["sweep", "tight-fan", "--n", "3..120"]);
    assert_eq!(rows.len(), 118);
    let rel: Vec<f64> = rows
        .iter()
        .map(|r| {
            let lambda = to_f64(&parse(&r[2]).unwrap());
            let gap = to_f64(&parse(&r[9]).unwrap());
            (gap - lambda / std::f64::consts::E).abs() / (lambda / std::f64::consts::E)
        })
        .collect();
    assert!(rel.windows(2).all(|w| w[1] < w[0]));
    // n = 50 sits about 3% below λ/e; n ≥ 80 is within 2%.
    assert!(rel[47] < 0.031);
    assert!(rel[77..].iter().all(|&e| e < 0.02));
}

#[test]
fn sweep_three_node_matches_closed_form() {
    let rows = sweep_rows(&["sweep", "three-node-tight", "--lambda", "0.25,0.5,1,2,10"]);
    assert_eq!(rows.len(), 5);
    for r in rows {
        let l = to_f64(&parse(&r[2]).unwrap());
        let gap = to_f64(&parse(&r[9]).unwrap());
        let coef = (2.0 + l - 2.0 * (1.0 + l).sqrt()) / l;
        assert!((gap - coef).abs() < 1e-9, "lambda {l}: {gap} vs {coef}");
    }
}

#[test]
fn sweep_is_deterministic_and_validates_input() {
    let a = run(&["sweep", "random-graphs", "--seed", "3", "--count", "5"]);
    let b = run(&["sweep", "random-graphs", "--seed", "3", "--count", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(&["sweep", "three-node-tight", "--lambda", ""]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "random-fans"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "moebius"]).status.code(), Some(1));
}
