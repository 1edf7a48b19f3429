use std::fs;
use std::path::PathBuf;

use arrowsym::graph::GraphSpec;
use arrowsym::pipeline::{
    reproduce_paper, run_pipeline, ExperimentReport, GeneratorSet, PipelineConfig,
};
use arrowsym::sbp::SbpMode;

fn spec(s: &str) -> GraphSpec {
    s.parse().unwrap()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Set `ARROWSYM_BLESS=1` to rewrite the golden file from the current run.
fn check_golden(name: &str, report: &ExperimentReport) {
    let text = serde_json::to_string_pretty(&report.without_timings()).unwrap() + "\n";
    let path = golden(name);
    if std::env::var_os("ARROWSYM_BLESS").is_some() {
        fs::write(&path, &text).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap();
    assert_eq!(text, want, "report drifted from {}", path.display());
}

#[test]
fn k5_k3_relaxed_golden() {
    let cfg = PipelineConfig::new(spec("k5"), spec("k3"), spec("k3")).with_sbp(SbpMode::Relaxed);
    let report = run_pipeline(&cfg).unwrap();
    report.check_consistency().unwrap();
    check_golden("k5_k3_relaxed.json", &report);
}

#[test]
fn c6_p3_exact_projected_golden() {
    let cfg = PipelineConfig::new(spec("c6"), spec("path:3"), spec("path:3"))
        .with_sbp(SbpMode::Exact)
        .projected(true);
    let report = run_pipeline(&cfg).unwrap();
    report.check_consistency().unwrap();
    check_golden("c6_p3_exact_projected.json", &report);
}

#[test]
fn report_round_trips_through_json() {
    let cfg = PipelineConfig::new(spec("k6"), spec("path:3"), spec("k3"))
        .with_sbp(SbpMode::Exact)
        .with_generators(GeneratorSet::Relabeling);
    let report = run_pipeline(&cfg).unwrap();
    let back: ExperimentReport =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn reproduction_is_deterministic_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let first = reproduce_paper(Some(dir.path())).unwrap();
    let second = reproduce_paper(None).unwrap();
    assert_eq!(first.without_timings(), second.without_timings());
    for row in &first.rows {
        row.report
            .check_consistency()
            .unwrap_or_else(|e| panic!("{}: {e}", row.label));
    }
    let mismatches: Vec<(String, String)> = first
        .mismatches()
        .into_iter()
        .map(|(l, c)| (l.to_string(), c.quantity.clone()))
        .collect();
    assert_eq!(
        mismatches,
        [("kex-none".to_string(), "classes".to_string())]
    );
    assert!(dir.path().join("reproduction.json").is_file());
    assert!(dir.path().join("reproduction.txt").is_file());
}
