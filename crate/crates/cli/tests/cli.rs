//! End-to-end tests of the command line interface.

mod common;

use std::fs;
use std::process::Command;

use common::{crossing_graph, star_collection, STAR_COEFF};
use netomo::formats::{AdjustmentDoc, GraphDoc, PruneDoc, TreesDoc};

fn netomo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_netomo"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn selftest_passes() {
    let out = netomo(&["selftest"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("4 of 4 checks passed"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn metric_compares_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.json");
    let hub = dir.path().join("hub.json");
    netomo::formats::write_json(&full, &GraphDoc::from_graph(&crossing_graph())).unwrap();
    netomo::formats::write_json(&hub, &GraphDoc::from_graph(&common::hub_graph())).unwrap();

    let out = netomo(&[
        "metric",
        "--true",
        full.to_str().unwrap(),
        "--inferred",
        hub.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut tm = stdout.lines().map(|l| {
        l.split_whitespace()
            .nth(1)
            .and_then(|v| v.parse::<f64>().ok())
            .expect("metric line")
    });
    let tm1 = tm.next().unwrap();
    let tm2 = tm.next().unwrap();
    assert!((tm1 - 6.0 / 46.0).abs() < 1e-12);
    assert!((tm2 - 0.5).abs() < 1e-12);
}

#[test]
fn adjust_restores_the_star_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let trees = dir.path().join("trees.json");
    let eps = 0.9;
    netomo::formats::write_json(&trees, &TreesDoc::from_collection(&star_collection(eps)))
        .unwrap();

    let out = netomo(&["adjust", "--trees", trees.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: AdjustmentDoc = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.weights.len(), 18);
    for (got, c) in doc.weights.iter().zip(STAR_COEFF) {
        let want = 1.0 + eps * c / 90.0;
        assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
    }
    assert!(doc.residual < 1e-9);
}

#[test]
fn prune_contracts_the_light_middle_edges() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.json");
    netomo::formats::write_json(&graph, &GraphDoc::from_graph(&crossing_graph())).unwrap();

    let out = netomo(&[
        "prune",
        "--graph",
        graph.to_str().unwrap(),
        "--delta",
        "0.25",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: PruneDoc = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.pruned.len(), 4);
    assert_eq!(doc.graph.vertices.len(), 5);
    for w in &doc.weights {
        assert!((w - 10.75).abs() < 1e-9, "got {w}");
    }
    assert!((doc.residual - 1.0).abs() < 1e-9);
}

#[test]
fn run_writes_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "sweep = \"windows\"\nvalues = [40, 80]\nrepetitions = 2\nexact_weights = true\n\n\
         [sim]\nnum_vertices = 12\ndegree = 3\nnum_boundary = 4\n",
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = netomo(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("report written"), "{stdout}");
    }

    let runs_a = fs::read_to_string(out_a.join("runs.csv")).unwrap();
    let runs_b = fs::read_to_string(out_b.join("runs.csv")).unwrap();
    assert_eq!(runs_a, runs_b);
    assert_eq!(runs_a.lines().count(), 5);
    // Exact weights round-trip to a perfect score.
    for line in runs_a.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[4].parse::<f64>().unwrap(), 0.0, "{line}");
        assert_eq!(fields[5].parse::<f64>().unwrap(), 0.0, "{line}");
    }
    let summary = fs::read_to_string(out_a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    fs::write(&config, "sweep = \"windows\"\nvalues = [80, 40]\n").unwrap();
    let out = netomo(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("strictly increasing"), "{err}");

    let out = netomo(&["metric", "--true", "missing.json", "--inferred", "x.json"]);
    assert!(!out.status.success());
}
