//! Runs the full suite twice and prints one line per acceptance criterion.

use std::io::Write;

use icx_harness::suite::{evaluate, run_suite, SuiteConfig};

/// C5 x P3 has reduced H_2 of rank one, so the printed bound r + 1 = 2 fails
/// there; the suite also checks the weaker join bound, which holds.
const KNOWN_UNATTAINABLE: [u8; 1] = [9];

#[test]
fn acceptance_criteria() {
    let cfg = SuiteConfig::default();
    let first = run_suite(&cfg).expect("first suite run");
    let second = run_suite(&cfg).expect("second suite run");
    let criteria = evaluate(&first, Some(&second));
    // written to the handle so the lines survive test output capture
    let mut out = std::io::stdout().lock();
    for c in &criteria {
        writeln!(out, "{}", c.line()).unwrap();
    }
    for r in first.reports.iter().filter(|r| r.probe && r.note.is_some()) {
        writeln!(out, "finding: {} predicted {} but oracle gives {}", r.case, r.predicted.as_deref().unwrap_or("?"), r.oracle_text()).unwrap();
    }
    assert_eq!(criteria.len(), 10);
    for c in first.connectivity.iter().filter(|c| c.probe && !c.holds) {
        writeln!(out, "finding: {} is {}, not acyclic through {}", c.graph, c.oracle, c.bound).unwrap();
    }
    let failed: Vec<u8> = criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert_eq!(failed, KNOWN_UNATTAINABLE, "failing criteria: {failed:?}");
}
