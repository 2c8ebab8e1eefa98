mod common;

#[test]
fn every_certified_design_survives_sampled_uncertainty() {
    let summary = common::soundness_harness(54, 2024);
    for f in &summary.failures {
        eprintln!("{f}");
    }
    eprintln!(
        "{} cases, {} certified, {} without certificate, {} candidates checked",
        summary.cases, summary.optimal, summary.not_optimal, summary.candidates
    );
    assert!(summary.cases >= 50);
    assert!(summary.optimal >= 25, "too few certified designs to say anything: {}", summary.optimal);
    assert_eq!(summary.violations, 0);
    assert!(summary.failures.is_empty());
}
