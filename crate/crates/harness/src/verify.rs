//! Prediction vs oracle vs engine, one case at a time or in parallel batches.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use anyhow::Context;
use icx_core::{
    betti_match, independence_homology, reduce_with, BettiTable, Certification, Graph,
    PredictionKey, Predicted, ReduceError, ReduceOptions, RuleOrder,
};
use rayon::prelude::*;

use crate::cache::Cache;
use crate::report::{canonicalize, EngineOutcome, Verdict, VerifyReport};

pub const DEFAULT_BUDGET: usize = 5_000_000;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineMode {
    Off,
    /// Rewriting only; a stuck node stops the engine.
    Strict,
    /// Stuck nodes are settled by the oracle.
    Fallback,
}

impl fmt::Display for EngineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineMode::Off => "off",
            EngineMode::Strict => "strict",
            EngineMode::Fallback => "fallback",
        })
    }
}

impl FromStr for EngineMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(EngineMode::Off),
            "strict" => Ok(EngineMode::Strict),
            "fallback" => Ok(EngineMode::Fallback),
            _ => Err(format!("unknown engine mode {s:?} (off, strict, fallback)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub budget: usize,
    pub engine: EngineMode,
    pub order: RuleOrder,
    /// The engine is skipped on graphs larger than this.
    pub engine_max_vertices: usize,
    pub timeout: Duration,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: DEFAULT_BUDGET,
            engine: EngineMode::Strict,
            order: RuleOrder::default(),
            engine_max_vertices: 40,
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

/// A case: a prediction key, or a bare graph checked by the engine alone.
#[derive(Clone, Debug)]
pub enum Case {
    Key(PredictionKey),
    Graph { name: String, graph: Graph },
}

impl Case {
    pub fn id(&self) -> String {
        match self {
            Case::Key(k) => k.id(),
            Case::Graph { name, .. } => name.clone(),
        }
    }

    pub fn graph(&self) -> anyhow::Result<Graph> {
        match self {
            Case::Key(k) => k.graph().with_context(|| format!("building {}", k.id())),
            Case::Graph { graph, .. } => Ok(graph.clone()),
        }
    }
}

impl From<PredictionKey> for Case {
    fn from(k: PredictionKey) -> Self {
        Case::Key(k)
    }
}

/// Oracle and engine results for one graph, shared by every case on it.
#[derive(Clone, Debug)]
pub struct Evidence {
    pub oracle: Option<BettiTable>,
    pub engine: Option<EngineOutcome>,
    pub note: Option<String>,
    /// False when a certified type has the wrong path components.
    pub pieces_ok: bool,
    pub millis: u64,
}

/// Runs `f` on a helper thread; `None` after `timeout`. A timed-out
/// computation keeps running in the background until it finishes.
pub fn with_timeout<T, F>(timeout: Duration, f: F) -> Option<T>
where
    T: Send + 'static,
    F: FnOnce() -> T + Send + 'static,
{
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(f());
    });
    rx.recv_timeout(timeout).ok()
}

pub fn run_engine(g: &Graph, opts: &VerifyOptions) -> Option<EngineOutcome> {
    if opts.engine == EngineMode::Off || g.vertex_count() > opts.engine_max_vertices {
        return None;
    }
    let ro = ReduceOptions { oracle_fallback: opts.engine == EngineMode::Fallback, budget: opts.budget };
    Some(match reduce_with(g, &opts.order, ro) {
        Ok(r) => match r.certification {
            Certification::Derived => EngineOutcome::Certified { ht: r.ht.to_string() },
            Certification::BettiCertified => EngineOutcome::Consistent {
                ht: r.ht.to_string(),
                oracle_leaves: r.trace.oracle_leaves(),
            },
        },
        Err(ReduceError::Stuck { vertices, .. }) => EngineOutcome::Stuck { vertices },
        Err(e) => EngineOutcome::Failed { error: e.to_string() },
    })
}

/// Oracle homology plus the engine, under the per-case timeout.
pub fn gather(g: &Graph, opts: &VerifyOptions) -> anyhow::Result<Evidence> {
    let start = Instant::now();
    let (g2, o2) = (g.clone(), opts.clone());
    let run = move || -> Result<(Option<BettiTable>, Option<EngineOutcome>, Option<String>, bool), String> {
        let (oracle, note) = match independence_homology(&g2, o2.budget) {
            Ok(t) => (Some(t), None),
            Err(e) if e.is_budget() => (None, Some(e.to_string())),
            Err(e) => return Err(e.to_string()),
        };
        let engine = run_engine(&g2, &o2);
        let pieces_ok = match &engine {
            Some(EngineOutcome::Certified { ht }) if oracle.is_some() => pieces_agree(&g2, ht, o2.budget),
            _ => true,
        };
        Ok((oracle, engine, note, pieces_ok))
    };
    let millis = |s: Instant| s.elapsed().as_millis() as u64;
    match with_timeout(opts.timeout, run) {
        None => Ok(Evidence {
            oracle: None,
            engine: None,
            note: Some(format!("timed out after {} s", opts.timeout.as_secs())),
            pieces_ok: true,
            millis: millis(start),
        }),
        Some(Err(e)) => Err(anyhow::anyhow!(e)),
        Some(Ok((oracle, engine, note, pieces_ok))) => {
            Ok(Evidence { oracle, engine, note, pieces_ok, millis: millis(start) })
        }
    }
}

fn pieces_agree(g: &Graph, ht: &str, budget: usize) -> bool {
    ht.parse::<icx_core::HtType>().is_ok_and(|ht| crate::sweep::pieces_match(g, &ht, budget))
}

fn engine_agrees(engine: &EngineOutcome, predicted: Option<&Predicted>, oracle: &BettiTable) -> bool {
    let EngineOutcome::Certified { ht } = engine else {
        return true;
    };
    let Ok(ht) = ht.parse::<icx_core::HtType>() else {
        return false;
    };
    let sound = betti_match(&ht, oracle);
    match predicted {
        Some(Predicted::Ht(p)) => sound && &ht == p,
        Some(Predicted::Poly(p)) => sound && &ht.to_betti() == p,
        None => sound,
    }
}

/// Combines a case with the evidence for its graph.
pub fn judge(case: &Case, g: &Graph, ev: &Evidence) -> anyhow::Result<VerifyReport> {
    let (predicted, probe) = match case {
        Case::Key(k) => (Some(k.predict().with_context(|| format!("predicting {}", k.id()))?), k.family.is_probe()),
        Case::Graph { .. } => (None, false),
    };
    let mut note = ev.note.clone();
    let verdict = match &ev.oracle {
        None => Verdict::BudgetExceeded,
        Some(oracle) => {
            let pred_ok = predicted.as_ref().map_or(true, |p| p.matches(oracle));
            let engine_ok =
                ev.pieces_ok && ev.engine.as_ref().map_or(true, |e| engine_agrees(e, predicted.as_ref(), oracle));
            if !engine_ok {
                note = Some("engine result disagrees".into());
            }
            let stuck = matches!(ev.engine, Some(EngineOutcome::Stuck { .. }) | None);
            if !pred_ok || !engine_ok {
                Verdict::Mismatch
            } else if predicted.is_none() && stuck {
                Verdict::EngineStuck
            } else {
                Verdict::Match
            }
        }
    };
    if probe && verdict == Verdict::Mismatch {
        note = Some("flagged: printed formula disagrees with the oracle".into());
    }
    Ok(VerifyReport {
        case: case.id(),
        graph_hash: g.canonical_hash(),
        vertices: g.vertex_count(),
        predicted: predicted.as_ref().map(|p| p.to_string()),
        predicted_betti: predicted.as_ref().map(|p| p.betti().to_string()),
        engine: ev.engine.clone(),
        oracle: ev.oracle.clone(),
        verdict,
        probe,
        note,
        millis: ev.millis,
    })
}

pub fn verify_case(case: &Case, opts: &VerifyOptions) -> anyhow::Result<VerifyReport> {
    let g = case.graph()?;
    judge(case, &g, &gather(&g, opts)?)
}

#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub cache_hits: usize,
    pub computed: usize,
}

fn cache_key(hash: &str, case: &Case, opts: &VerifyOptions) -> String {
    format!("{hash}_{}_{}_{}", case.id(), opts.engine, opts.order.name())
}

/// Verifies a batch. Graphs shared by several cases are evaluated once;
/// cached matches are reused unless `force`; results come back sorted by case.
pub fn run_cases(
    cases: &[Case],
    opts: &VerifyOptions,
    cache: Option<&Cache>,
    force: bool,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<(Vec<VerifyReport>, RunStats)> {
    let mut stats = RunStats::default();
    let mut reports = Vec::with_capacity(cases.len());
    let mut todo: BTreeMap<String, (Graph, Vec<&Case>)> = BTreeMap::new();
    for case in cases {
        let g = case.graph()?;
        let hash = g.canonical_hash();
        if let (Some(c), false) = (cache, force) {
            if let Some(r) = c.get::<VerifyReport>(&cache_key(&hash, case, opts)) {
                if r.verdict == Verdict::Match {
                    stats.cache_hits += 1;
                    reports.push(r);
                    continue;
                }
            }
        }
        todo.entry(hash).or_insert_with(|| (g, Vec::new())).1.push(case);
    }
    let jobs: Vec<(&Graph, &Vec<&Case>)> = todo.values().map(|(g, cs)| (g, cs)).collect();
    let evidence: Vec<anyhow::Result<Evidence>> =
        pool.install(|| jobs.par_iter().map(|(g, _)| gather(g, opts)).collect());
    // single writer
    for ((g, cs), ev) in jobs.iter().zip(evidence) {
        let ev = ev?;
        for case in cs.iter() {
            let r = judge(case, g, &ev)?;
            stats.computed += 1;
            if let Some(c) = cache {
                c.put(&cache_key(&r.graph_hash, case, opts), &r)?;
            }
            reports.push(r);
        }
    }
    canonicalize(&mut reports);
    Ok((reports, stats))
}

pub fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use icx_core::Family;

    fn key(f: Family, p: &[usize]) -> Case {
        Case::Key(PredictionKey::new(f, p).unwrap())
    }

    #[test]
    fn strong_three_by_four_matches() {
        let r = verify_case(&key(Family::StrongP3, &[4]), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        assert_eq!(r.oracle, Some(BettiTable::from_ranks([(1, 3), (2, 2)])));
        let expected = icx_core::HtType::wedge_of(&[(1, 3), (2, 2)]).unwrap().to_string();
        assert_eq!(r.predicted, Some(expected));
        assert!(matches!(r.engine, Some(EngineOutcome::Certified { .. })));
    }

    #[test]
    fn contractible_categorical_grid_cell() {
        let r = verify_case(&key(Family::CatPathPath, &[4, 6]), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        assert!(r.oracle.unwrap().is_trivial());
    }

    #[test]
    fn printed_generating_function_is_flagged() {
        let r = verify_case(&key(Family::GenfnG, &[2]), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Mismatch);
        assert!(r.probe && r.ok());
        assert!(r.note.unwrap().starts_with("flagged"));
    }

    #[test]
    fn budget_is_reported_not_thrown() {
        let opts = VerifyOptions { budget: 10, ..VerifyOptions::default() };
        let r = verify_case(&key(Family::StrongP2, &[6]), &opts).unwrap();
        assert_eq!(r.verdict, Verdict::BudgetExceeded);
        assert!(!r.ok());
    }

    #[test]
    fn timeout_is_budget_exceeded() {
        assert_eq!(with_timeout(Duration::from_millis(10), || 3), Some(3));
        assert_eq!(
            with_timeout(Duration::from_millis(10), || std::thread::sleep(Duration::from_secs(2))),
            None
        );
    }

    #[test]
    fn engine_only_cases() {
        let opts = VerifyOptions::default();
        let c8 = Case::Graph { name: "c8".into(), graph: Graph::cycle(8).unwrap() };
        assert_eq!(verify_case(&c8, &opts).unwrap().verdict, Verdict::Match);
        let cube = Graph::from_edges(
            8,
            [(0, 1), (1, 3), (3, 2), (2, 0), (4, 5), (5, 7), (7, 6), (6, 4), (0, 4), (1, 5), (2, 6), (3, 7)],
        )
        .unwrap();
        let case = Case::Graph { name: "cube".into(), graph: cube };
        assert_eq!(verify_case(&case, &opts).unwrap().verdict, Verdict::EngineStuck);
        let fb = VerifyOptions { engine: EngineMode::Fallback, ..opts };
        let r = verify_case(&case, &fb).unwrap();
        assert_eq!(r.verdict, Verdict::Match);
        assert!(matches!(r.engine, Some(EngineOutcome::Consistent { .. })));
    }

    #[test]
    fn batches_share_graphs_and_use_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let cases = vec![key(Family::FPoly, &[3]), key(Family::StrongP2, &[3]), key(Family::Path, &[5])];
        let opts = VerifyOptions::default();
        let p = pool(2).unwrap();
        let (a, s1) = run_cases(&cases, &opts, Some(&cache), false, &p).unwrap();
        assert_eq!((s1.cache_hits, s1.computed), (0, 3));
        let (b, s2) = run_cases(&cases, &opts, Some(&cache), false, &p).unwrap();
        assert_eq!((s2.cache_hits, s2.computed), (3, 0));
        assert_eq!(a, b);
        let (_, s3) = run_cases(&cases, &opts, Some(&cache), true, &p).unwrap();
        assert_eq!(s3.computed, 3);
        let ids: Vec<&str> = a.iter().map(|r| r.case.as_str()).collect();
        assert_eq!(ids, ["f_poly(3)", "path(5)", "strong_p2(3)"]);
    }

    #[test]
    fn worker_count_does_not_change_reports() {
        let cases: Vec<Case> = (1..=6).map(|n| key(Family::StrongP3, &[n])).collect();
        let opts = VerifyOptions::default();
        let canon = |w| -> Vec<String> {
            run_cases(&cases, &opts, None, false, &pool(w).unwrap()).unwrap().0.iter().map(|r| r.canonical_json()).collect()
        };
        assert_eq!(canon(1), canon(3));
    }
}
