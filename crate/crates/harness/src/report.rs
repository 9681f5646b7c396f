//! Verification records and their JSON-lines / CSV renderings.

use std::fmt;
use std::io::Write;
use std::path::Path;

use icx_core::BettiTable;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    Mismatch,
    EngineStuck,
    BudgetExceeded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::EngineStuck => "engine-stuck",
            Verdict::BudgetExceeded => "budget-exceeded",
        })
    }
}

/// What the reduction engine said about a case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum EngineOutcome {
    /// Fully derived by rewriting: the type is certified.
    Certified { ht: String },
    /// Needed oracle leaves: only consistent with the homology.
    Consistent { ht: String, oracle_leaves: usize },
    Stuck { vertices: usize },
    Failed { error: String },
}

impl EngineOutcome {
    pub fn ht(&self) -> Option<&str> {
        match self {
            EngineOutcome::Certified { ht } | EngineOutcome::Consistent { ht, .. } => Some(ht),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub case: String,
    pub graph_hash: String,
    pub vertices: usize,
    /// Canonical string of the prediction, absent for engine-only cases.
    pub predicted: Option<String>,
    pub predicted_betti: Option<String>,
    pub engine: Option<EngineOutcome>,
    pub oracle: Option<BettiTable>,
    pub verdict: Verdict,
    /// Erratum probes: expected to mismatch and excluded from exit codes.
    pub probe: bool,
    pub note: Option<String>,
    pub millis: u64,
}

impl VerifyReport {
    /// Passing for exit-code purposes.
    pub fn ok(&self) -> bool {
        self.probe || self.verdict == Verdict::Match
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// JSON with timing fields zeroed, for determinism comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.millis = 0;
        r.json_line()
    }

    pub fn oracle_text(&self) -> String {
        self.oracle.as_ref().map(|t| t.to_string()).unwrap_or_default()
    }
}

/// Sorts by case id so that worker count never changes the output order.
pub fn canonicalize(reports: &mut [VerifyReport]) {
    reports.sort_by(|a, b| a.case.cmp(&b.case).then(a.graph_hash.cmp(&b.graph_hash)));
}

pub fn write_jsonl<W: Write>(out: &mut W, reports: &[VerifyReport]) -> std::io::Result<()> {
    for r in reports {
        writeln!(out, "{}", r.json_line())?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(out: W, reports: &[VerifyReport]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "verdict", "betti", "predicted", "millis"])?;
    for r in reports {
        w.write_record([
            r.case.clone(),
            r.verdict.to_string(),
            r.oracle_text(),
            r.predicted.clone().unwrap_or_default(),
            r.millis.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.jsonl` and `<stem>.csv` into `dir`.
pub fn emit(dir: &Path, stem: &str, reports: &[VerifyReport]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut jsonl = std::fs::File::create(dir.join(format!("{stem}.jsonl")))?;
    write_jsonl(&mut jsonl, reports)?;
    write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?, reports)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(case: &str, millis: u64) -> VerifyReport {
        VerifyReport {
            case: case.into(),
            graph_hash: "h".into(),
            vertices: 3,
            predicted: Some("S^0".into()),
            predicted_betti: Some("1".into()),
            engine: None,
            oracle: Some(BettiTable::from_ranks([(0, 1)])),
            verdict: Verdict::Match,
            probe: false,
            note: None,
            millis,
        }
    }

    #[test]
    fn canonical_json_ignores_timing() {
        assert_eq!(sample("a", 5).canonical_json(), sample("a", 900).canonical_json());
        assert_ne!(sample("a", 5).json_line(), sample("a", 900).json_line());
    }

    #[test]
    fn json_round_trip_and_verdict_names() {
        let r = sample("path(3)", 1);
        let back: VerifyReport = serde_json::from_str(&r.json_line()).unwrap();
        assert_eq!(back, r);
        assert!(r.json_line().contains("\"verdict\":\"match\""));
        assert_eq!(
            serde_json::to_string(&Verdict::BudgetExceeded).unwrap(),
            "\"budget-exceeded\""
        );
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[sample("strong_p3(3)", 7)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("case,verdict,betti,predicted,millis"));
        assert_eq!(lines.next(), Some("strong_p3(3),match,{0: 1},S^0,7"));
    }

    #[test]
    fn emit_writes_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        emit(dir.path(), "run", &[sample("x", 1), sample("y", 2)]).unwrap();
        let jsonl = std::fs::read_to_string(dir.path().join("run.jsonl")).unwrap();
        assert_eq!(jsonl.lines().count(), 2);
        let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }
}
