use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sassur")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sassur-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_reports_isostatic() {
    let out = run(&["check", &fixture("c3_desargues")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pinned_s_isostatic"], true);
    assert_eq!(v["counts"]["satisfied"], true);
    assert_eq!(v["columns"], 4);
}

#[test]
fn negative_results_exit_one() {
    let out = run(&["check", &fixture("fig2b")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pinned_s_isostatic"], false);
    assert_eq!(run(&["orient", &fixture("fig2b")]).status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    let out = run(&["check", "/nonexistent/framework.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/framework.json"));
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{\n  \"dimension\": 2,\n  oops\n}").unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run(&["drive", &fixture("c3_desargues"), "--edge", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decompose_prints_two_components() {
    let out = run(&["decompose", &fixture("c3_desargues")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let comps: Vec<&str> = v["components"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(comps, vec!["u", "w"]);
    assert_eq!(v["s_assur"], false);
    assert_eq!(v["max_upper"], 0.0);
}

#[test]
fn outputs_are_deterministic_per_seed() {
    for cmd in ["check", "decompose", "matrix", "lift"] {
        let a = run(&[cmd, &fixture("fig7_mirror"), "--seed", "7"]);
        let b = run(&[cmd, &fixture("fig7_mirror"), "--seed", "7"]);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        assert!(!a.stdout.is_empty());
    }
    let a = run(&["matrix", &fixture("fig7_mirror"), "--seed", "7"]);
    let b = run(&["matrix", &fixture("fig7_mirror"), "--seed", "8"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn matrix_csv_matches_the_example() {
    let out = run(&["matrix", &fixture("c3_desargues")]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "edge,u.0,u.1,w.0,w.1");
    let q = 3f64.sqrt() / 4.0;
    let want = [
        ("e1", [-1.0 + q, 1.75, 0.0, 0.0]),
        ("e2", [-1.0 - q, 1.75, 0.0, 0.0]),
        ("e3", [1.0, -1.0, -1.0, 1.0]),
        ("e4", [0.0, 0.0, -6.0, 9.0]),
    ];
    for (line, (edge, row)) in lines.zip(want) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], edge);
        for (c, w) in cells[1..].iter().zip(row) {
            assert!((c.parse::<f64>().unwrap() - w).abs() <= 1e-12, "{edge}: {c} vs {w}");
        }
    }
}

#[test]
fn drive_reports_the_still_bottom() {
    let out = run(&["drive", &fixture("c3_desargues"), "--edge", "e4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["moving_vertices"], serde_json::json!(["w"]));
    assert_eq!(v["moving_by_majority"], serde_json::json!(["w"]));
}

#[test]
fn lift_counts_covering_components() {
    let v = json(&run(&["lift", &fixture("c3_desargues")]));
    assert_eq!(v["cover_components"].as_array().unwrap().len(), 4);
    assert_eq!(v["round_trip"], true);
}

#[test]
fn subgroup_and_dot_files() {
    let dot = scratch("c3.dot");
    let out = run(&["subgroup", &fixture("fig8_c6"), "--elements", "r2", "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["group"], "C6<3>");
    assert_eq!(v["components"].as_array().unwrap().len(), 3);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph assur_blocks {") && text.contains("doublecircle"));

    let report = scratch("orient.json");
    let out =
        run(&["orient", &fixture("c3_desargues"), "--dot", dot.to_str().unwrap(), "--json", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot).unwrap().contains("\"e4: r1\""));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved, json(&out));
}

#[test]
fn extend_prints_a_framework() {
    let spec = scratch("merge.json");
    std::fs::write(
        &spec,
        r#"{"kind": "one", "vertex": "d", "edge": "ba", "split_gains": ["id", "id"], "targets": ["c"], "gains": ["id"]}"#,
    )
    .unwrap();
    let out = run(&["extend", &fixture("fig15_c4"), "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let f = sassur::io::parse_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!((f.graph.inner().len(), f.graph.edges.len()), (4, 8));

    let report = scratch("extend.json");
    run(&["extend", &fixture("fig15_c4"), "--spec", spec.to_str().unwrap(), "--json", report.to_str().unwrap()]);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["classification"]["observed"], "merged");
    assert_eq!(saved["classification"]["predicted"], "merged");
}
