use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use commvuln_core::export::{trace_document, TraceDocument};
use commvuln_core::pipeline::{self, EvaluateOptions};
use commvuln_core::{parse_edge_list, SobolConfig, SobolResult, VulnerabilityReport};
use tempfile::TempDir;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/canonical9.edges")
}

fn commvuln(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commvuln"))
        .args(args)
        .env_remove("COMMVULN_THREADS")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = commvuln(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_table_shows_modularity_trace() {
    let out = stdout(&["detect", s(&fixture())]);
    let qs: Vec<f64> = out
        .lines()
        .skip(2)
        .take(8)
        .map(|l| l.split_whitespace().rev().nth(1).unwrap().parse().unwrap())
        .collect();
    let expected = [
        -0.1224, -0.0612, -0.0051, 0.0995, 0.1403, 0.2117, 0.2857, 0.2653,
    ];
    for (q, e) in qs.iter().zip(expected) {
        assert_eq!(format!("{q:.4}"), format!("{e:.4}"));
    }
    assert!(out.contains("final: {1, 2}, {3, 4, 5}, {6, 7, 8, 9}"));
}

#[test]
fn detect_csv_has_one_row_per_step() {
    let out = stdout(&["detect", s(&fixture()), "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,communities,q,delta_q,applied");
    assert_eq!(lines.len(), 9);
    assert!(lines[8].ends_with(",-0.020408,false"));
}

#[test]
fn triangle_collapses_to_one_community() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.edges", "a b\nb c\na c\n");
    let out = stdout(&["detect", s(&tri), "--format", "json"]);
    let doc: TraceDocument = serde_json::from_str(&out).unwrap();
    assert_eq!(doc.partition, vec![vec!["a", "b", "c"]]);
    assert_eq!(doc.final_q, 0.0);
}

#[test]
fn empty_and_missing_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.edges", "# nothing here\n");
    for args in [
        vec!["detect", s(&empty)],
        vec!["evaluate", s(&empty)],
        vec!["detect", "/nonexistent/graph.edges"],
    ] {
        let out = commvuln(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
    let bad = write(&dir, "bad.edges", "a b\nc\n");
    let out = commvuln(&["detect", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn invalid_flags_exit_two() {
    let f = fixture();
    for args in [
        vec!["evaluate", s(&f), "--phi", "0"],
        vec!["evaluate", s(&f), "--phi", "-1"],
        vec!["evaluate", s(&f), "--alpha", "nan"],
        vec!["sensitivity", s(&f), "--samples", "63"],
        vec!["sensitivity", s(&f), "--range-lo", "2", "--range-hi", "1"],
        vec!["detect", s(&f), "--format", "xml"],
        vec!["export-cn", s(&f), "--format", "table"],
    ] {
        assert_eq!(commvuln(&args).status.code(), Some(2), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_commvuln"))
        .args(["detect", s(&f)])
        .env("COMMVULN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_failures_exit_three_with_stage() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.edges", "a b\nb c\na c\n");
    let out = commvuln(&["evaluate", s(&tri)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("community network:"));
    let apart = write(&dir, "apart.edges", "a b\nb c\nc a\nx y\ny z\nz x\n");
    let out = commvuln(&["evaluate", s(&apart)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vulnerability:"));
}

#[test]
fn evaluate_reports_ranking_and_relative_vulnerability() {
    let out = stdout(&["evaluate", s(&fixture())]);
    assert!(out.contains("fuzzy ranking: [c3 ≤ c2 ≪ c1]"));
    let csv = stdout(&["evaluate", s(&fixture()), "--format", "csv"]);
    let xi: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(9).unwrap().parse().unwrap())
        .collect();
    for (x, e) in xi.iter().zip([17.6099, 4.3133, 1.0]) {
        assert!(((x - e) / e).abs() <= 0.005, "{xi:?}");
    }
}

#[test]
fn classical_weights_give_inverse_eoc() {
    let csv = stdout(&[
        "evaluate",
        s(&fixture()),
        "--alpha",
        "0",
        "--beta",
        "1",
        "--chi",
        "0",
        "--format",
        "csv",
    ]);
    let zeta: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap())
        .collect();
    assert_eq!(zeta, ["2.000000", "2.000000", "1.000000"]);
}

#[test]
fn barbell_has_a_single_relation() {
    let dir = TempDir::new().unwrap();
    let bar = write(&dir, "bar.edges", "a b\nb c\nc a\nx y\ny z\nz x\nc x\n");
    let json = stdout(&["evaluate", s(&bar), "--format", "json"]);
    let report: VulnerabilityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.communities.len(), 2);
    assert_eq!(report.ranking.relations.len(), 1);
    assert_eq!(report.chain, "c1 ~ c2");
}

#[test]
fn isolated_community_serializes_infinity() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "g.edges",
        "a b\nb c\nc a\nx y\ny z\nz x\nc x\np q\nq r\nr p\n",
    );
    let csv = stdout(&["evaluate", s(&g), "--format", "csv"]);
    let last = csv.lines().last().unwrap();
    assert!(
        last.starts_with("c3,") && last.contains(",inf,inf,1,"),
        "{last}"
    );
    let json = stdout(&["evaluate", s(&g), "--format", "json"]);
    assert!(json.contains("\"zeta\": \"inf\""));
    let report: VulnerabilityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.communities[2].xi, f64::INFINITY);
    assert!(stdout(&["evaluate", s(&g)]).contains("[c1 ≈ c2 ≪ c3]"));
}

#[test]
fn json_reports_round_trip_exactly() {
    let text = std::fs::read_to_string(fixture()).unwrap();
    let g = parse_edge_list(&text).unwrap();
    let opts = EvaluateOptions::default();
    let eval = pipeline::evaluate(&g, &opts).unwrap();

    let json = stdout(&["evaluate", s(&fixture()), "--format", "json"]);
    let report: VulnerabilityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report, eval.report);

    let json = stdout(&["detect", s(&fixture()), "--format", "json"]);
    let doc: TraceDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(doc, trace_document(&g, &eval.trace));

    let json = stdout(&[
        "sensitivity",
        s(&fixture()),
        "--format",
        "json",
        "--samples",
        "512",
        "--seed",
        "7",
    ]);
    let result: SobolResult = serde_json::from_str(&json).unwrap();
    let config = SobolConfig {
        samples: 512,
        seed: 7,
        ..SobolConfig::default()
    };
    assert_eq!(result, pipeline::sensitivity(&g, &opts, &config).unwrap());
}

#[test]
fn sensitivity_flags_constant_community() {
    let csv = stdout(&[
        "sensitivity",
        s(&fixture()),
        "--format",
        "csv",
        "--samples",
        "256",
    ]);
    let c3: Vec<&str> = csv.lines().filter(|l| l.starts_with("c3,")).collect();
    assert_eq!(c3.len(), 3);
    for row in c3 {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(&cells[2..4], ["0.000000", "0.000000"]);
        assert!(row.contains("zero-variance"));
    }
}

#[test]
fn sensitivity_depends_on_seed_and_range() {
    let f = fixture();
    let base = stdout(&["sensitivity", s(&f), "--samples", "256"]);
    assert_eq!(base, stdout(&["sensitivity", s(&f), "--samples", "256"]));
    assert_ne!(
        base,
        stdout(&["sensitivity", s(&f), "--samples", "256", "--seed", "43"])
    );
    let narrow = stdout(&[
        "sensitivity",
        s(&f),
        "--samples",
        "256",
        "--range-lo",
        "0.5",
        "--range-hi",
        "1.5",
    ]);
    assert!(narrow.contains("uniform[0.5, 1.5)"));
}

#[test]
fn export_cn_formats() {
    let dot = stdout(&["export-cn", s(&fixture())]);
    assert!(dot.starts_with("graph community_network {"));
    assert!(dot.contains("c2 -- c3 [weight=0.506719"));
    let csv = stdout(&["export-cn", s(&fixture()), "--format", "csv"]);
    assert_eq!(csv.lines().next(), Some("community,c1,c2,c3"));
    let json = stdout(&["export-cn", s(&fixture()), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v.is_object());
    let steeper = stdout(&["export-cn", s(&fixture()), "--phi", "10"]);
    assert_ne!(dot, steeper);
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("trace.csv");
    let out = commvuln(&[
        "detect",
        s(&fixture()),
        "--format",
        "csv",
        "--output",
        s(&target),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&target).unwrap(),
        stdout(&["detect", s(&fixture()), "--format", "csv"])
    );
}

#[test]
fn full_degree_mode_changes_distances() {
    let intra = stdout(&["export-cn", s(&fixture()), "--format", "csv"]);
    let full = stdout(&[
        "export-cn",
        s(&fixture()),
        "--format",
        "csv",
        "--degree-mode",
        "full",
    ]);
    assert_ne!(intra, full);
}
