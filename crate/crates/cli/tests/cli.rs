use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn loglin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loglin"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn gen_graph_writes_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let o = loglin(&["gen-graph", "lattice:4"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("#vertices 16\n"));
    assert_eq!(text.lines().count(), 25);
    let o = loglin(&["gen-graph", "random:10:0.5"], dir.path());
    assert!(!o.status.success());
    let a = loglin(&["gen-graph", "random:10:0.5", "--seed", "4"], dir.path());
    let b = loglin(&["gen-graph", "random:10:0.5", "--seed", "4"], dir.path());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn generate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(loglin(&["gen-graph", "cycle:4", "--out", "g.txt"], d).status.success());
    let o = loglin(
        &["gen-data", "--graph", "g.txt", "--theta-seed", "3", "--theta-out", "theta.json",
          "-n", "5000", "--seed", "9", "--out", "data.csv"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(d.join("data.csv")).unwrap().starts_with("cell,count\n"));
    for method in ["global", "one-hop", "two-hop", "pseudo"] {
        let run = || loglin(&["estimate", "--graph", "g.txt", "--data", "data.csv", "--method", method], d);
        let (a, b) = (run(), run());
        assert!(a.status.success(), "{method}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
        let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(report["existence"], true);
        assert_eq!(report["method"], method);
        assert_eq!(report["theta"]["entries"].as_array().unwrap().len(), 8);
    }
    let cells = loglin(
        &["gen-data", "--graph", "g.txt", "--theta", "theta.json", "-n", "50", "--seed", "1",
          "--format", "cells", "--sampler", "gibbs", "--out", "cells.txt"],
        d,
    );
    assert!(cells.status.success(), "{}", stderr(&cells));
    assert_eq!(fs::read_to_string(d.join("cells.txt")).unwrap().lines().count(), 50);
}

#[test]
fn nonexistence_has_its_own_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.txt"), "#vertices 2\n0 1\n").unwrap();
    fs::write(d.join("data.csv"), "cell,count\n11,4\n01,2\n").unwrap();
    let o = loglin(&["estimate", "--graph", "g.txt", "--data", "data.csv", "--method", "global"], d);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["existence"], false);
    assert!(report["theta"].is_null());
}

#[test]
fn errors_are_reported_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.txt"), "#vertices 2\n0 1\n").unwrap();
    fs::write(d.join("bad.csv"), "cell,count\n11,4\n0x,2\n").unwrap();
    let o = loglin(&["estimate", "--graph", "g.txt", "--data", "bad.csv", "--method", "global"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    assert!(loglin(&["gen-graph", "lattice:10", "--out", "big.txt"], d).status.success());
    fs::write(d.join("empty.csv"), "cell,count\n").unwrap();
    let o = loglin(&["estimate", "--graph", "big.txt", "--data", "empty.csv", "--method", "global"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("one-hop or two-hop"), "{}", stderr(&o));

    let o = loglin(&["estimate", "--graph", "g.txt", "--data", "bad.csv", "--method", "magic"], d);
    assert!(stderr(&o).contains("unknown method"));
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = loglin(&["mse-sweep", "--spec", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = loglin(&["verify", "cycle:4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

const SPEC: &str = r#"{
  "graph": {"kind": "cycle", "n": 4},
  "theta": {"kind": "random", "seed": 5},
  "sample_sizes": [100, 6400],
  "replications": 1,
  "methods": ["global", "one-hop", "two-hop", "pseudo"],
  "seed": 0
}"#;

#[test]
fn sweeps_are_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("spec.json"), SPEC).unwrap();
    let a = loglin(&["mse-sweep", "--spec", "spec.json", "--seed", "7"], d);
    let b = loglin(&["mse-sweep", "--spec", "spec.json", "--seed", "7"], d);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# spec: {") && header.contains("\"seed\":7"));
    assert_eq!(lines.next().unwrap(), "method,n,mean_rel_mse,sd,kept,discarded");
    assert_eq!(lines.count(), 8);

    let o = loglin(
        &["variance-sweep", "--spec", "spec.json", "--seed", "7", "--vertex", "0", "--cell", "1100"],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("method,n,mean,variance,variance_se,kept,discarded"));
    let o = loglin(
        &["variance-sweep", "--spec", "spec.json", "--seed", "7", "--vertex", "0", "--cell", "0100"],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not exempt"));
}

#[test]
fn verify_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = loglin(&["verify", "star:3", "--seed", "1", "--draws", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 4);
    assert!(stderr(&o).contains("PASS decomposable closed form vs Newton"));
}
