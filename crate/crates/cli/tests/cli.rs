use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

fn mwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn analyze_reports_holding_verdict() {
    let out = mwc(&["analyze", path_str(&fixture("g3"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["conditions"]["verdict_theorem_3_12"], "holds");
    assert_eq!(v["run"]["command"], "analyze");
    assert_eq!(v["run"]["tolerances"]["definiteness"], 1e-9);
}

#[test]
fn malformed_input_exits_two() {
    let out = mwc(&["analyze", path_str(&fixture("malformed"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let missing = mwc(&["analyze", "/nonexistent/graph.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_rejected() {
    let out = mwc(&["analyze", "--frobnicate", path_str(&fixture("g3"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn disconnected_graph_is_a_successful_analysis() {
    let out = mwc(&["analyze", path_str(&fixture("disconnected"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["conditions"]["connected"], false);
    assert_eq!(v["conditions"]["predicted"]["kind"], "not_bipartite");
}

#[test]
fn simulate_writes_trajectory_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out = mwc(&[
        "simulate",
        path_str(&fixture("g4")),
        "--seed",
        "7",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let outcome: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g4.outcome.json")).unwrap())
            .unwrap();
    assert_eq!(outcome["outcome"]["label"]["kind"], "bipartite");
    assert!(outcome["agreement_residual"].as_f64().unwrap() <= 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("g4.trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,node1_0,node1_1,node2_0"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn single_bridge_simulates_to_clusters() {
    let out = mwc(&["simulate", path_str(&fixture("g1")), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["outcome"]["label"]["kind"], "cluster");
}

#[test]
fn rk4_agrees_with_projection() {
    let out = mwc(&["simulate", path_str(&fixture("g3")), "--method", "rk4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["outcome"]["label"]["kind"], "consensus");
    assert!(v["agreement_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn horizon_errors_have_distinct_codes() {
    let g3 = fixture("g3");
    assert_eq!(
        mwc(&["simulate", path_str(&g3), "--horizon", "0"])
            .status
            .code(),
        Some(2)
    );
    let short = mwc(&["simulate", path_str(&g3), "--horizon", "0.01"]);
    assert_eq!(short.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&short.stderr).contains("horizon"));
}

#[test]
fn exhausted_budgets_exit_three() {
    let g5 = fixture("g5");
    assert_eq!(
        mwc(&["analyze", path_str(&g5), "--partition-cap", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        mwc(&["analyze", path_str(&fixture("g3")), "--path-cap", "1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn infeasible_recipe_exits_two() {
    let out = mwc(&["gen", "--violate", "condition2", "--d", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violation_expectation_carries_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = mwc(&[
        "gen",
        "--violate",
        "condition4",
        "--seed",
        "1",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let exp: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("graph_1.expectation.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(exp["expected_class"], "cluster");
    assert!(exp["witness"].as_array().is_some_and(|w| !w.is_empty()));
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let out = mwc(&[
            "gen",
            "--count",
            "6",
            "--seed",
            "3",
            "--bipartite",
            "--jobs",
            jobs,
            "--out",
            path_str(dir.path()),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let graph = dir.path().join("graph_5.json");
        for cmd in ["analyze", "simulate"] {
            let out = mwc(&[
                cmd,
                path_str(&graph),
                "--seed",
                "9",
                "--out",
                path_str(dir.path()),
            ]);
            assert_eq!(out.status.code(), Some(0));
        }
    }
    let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert_eq!(fa.len(), fb.len());
    for ((na, ca), (nb, cb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        if na.ends_with(".expectation.json")
            || na.ends_with(".report.json")
            || na.ends_with(".outcome.json")
        {
            // Embedded run configs differ in `--jobs` and `--out` only.
            let strip = |c: &[u8]| {
                let mut v: Value = serde_json::from_slice(c).unwrap();
                v.as_object_mut().unwrap().remove("run");
                v
            };
            assert_eq!(strip(ca), strip(cb), "{na}");
        } else {
            assert_eq!(ca, cb, "{na}");
        }
    }
    let again = mwc(&["analyze", path_str(&a.path().join("graph_5.json"))]);
    let twice = mwc(&["analyze", path_str(&a.path().join("graph_5.json"))]);
    assert_eq!(again.stdout, twice.stdout);
}

#[test]
fn generated_instances_match_their_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let out = mwc(&[
        "gen",
        "--count",
        "100",
        "--bipartite",
        "--d",
        "3",
        "--max-path-len",
        "2",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for seed in 0..100 {
        let graph = dir.path().join(format!("graph_{seed}.json"));
        let exp: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("graph_{seed}.expectation.json")))
                .unwrap(),
        )
        .unwrap();
        let expected = exp["expected_class"].as_str().unwrap();
        let report = json_of(&mwc(&["analyze", path_str(&graph)]));
        assert_eq!(report["spectral"]["class"]["kind"], expected, "seed {seed}");
        assert_eq!(
            report["conditions"]["verdict_theorem_3_8"], "holds",
            "seed {seed}"
        );
        let sim = json_of(&mwc(&["simulate", path_str(&graph), "--seed", "1"]));
        let label = sim["outcome"]["label"]["kind"].as_str().unwrap();
        let want = if expected == "bipartite_consensus" {
            "bipartite"
        } else {
            expected
        };
        assert_eq!(label, want, "seed {seed}");
    }
}
