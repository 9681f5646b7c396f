use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use icx_core::complex::face_vertices;
use icx_core::{
    independence_complex, independence_homology, reduce_with, ReduceOptions, RuleOrder, PredictionKey,
};
use icx_harness::report::{self, VerifyReport};
use icx_harness::suite::{self, DEFAULT_SEED};
use icx_harness::sweep::{self, SampleMode, SweepConfig, SweepSummary};
use icx_harness::verify::{self, Case, EngineMode, VerifyOptions, DEFAULT_BUDGET};
use icx_harness::{parse_graph, Cache};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Independence complexes of graph products: construction, exact homology,
/// homotopy reduction and closed-form verification.
#[derive(Parser, Debug)]
#[command(name = "icx", version)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Face budget per complex [default: 5000000, or 10000000 for `verify --suite` and `verify --acceptance`].
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true, env = "ICX_CACHE_DIR", default_value = ".icx-cache")]
    cache_dir: PathBuf,
    /// Recompute cached results.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a graph expression as JSON, e.g. `strong(path(3),path(4))`.
    Graph { expr: String },
    /// Faces of I(G) as JSON lines, then the f-vector as a CSV row.
    Complex { expr: String },
    /// Reduced integer homology of I(G).
    Homology { expr: String },
    /// Homotopy type of I(G) by the rewriting rules.
    Reduce {
        expr: String,
        /// Rule order preset.
        #[arg(long, default_value = "default")]
        strategy: String,
        /// Emit the derivation trace as JSON lines.
        #[arg(long)]
        trace: bool,
        /// Settle stuck subgraphs with the oracle.
        #[arg(long)]
        fallback: bool,
    },
    /// Closed-form prediction for a family.
    Predict {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<usize>,
    },
    /// Compare predictions with the oracle and the engine.
    Verify {
        /// Keys such as `strong_p3(4)`; repeatable.
        #[arg(long)]
        key: Vec<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, value_delimiter = ',')]
        params: Vec<usize>,
        /// Graph expressions checked by the engine alone; repeatable.
        #[arg(long)]
        graph: Vec<String>,
        /// Every prediction key of the acceptance suite.
        #[arg(long)]
        suite: bool,
        /// Run the whole acceptance suite twice and print one line per criterion.
        #[arg(long, conflicts_with_all = ["key", "family", "graph", "suite"])]
        acceptance: bool,
        #[arg(long, default_value = "strict")]
        engine: EngineMode,
        #[arg(long, default_value = "default")]
        strategy: String,
        /// Per-case timeout in seconds.
        #[arg(long, default_value_t = 120)]
        timeout: u64,
        /// Also write `<out>/verify.jsonl` and `<out>/verify.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
    },
    /// Induced-subgraph sweep for torsion and the single-wedge shape.
    Sweep {
        /// Graph expression; omit with `--suite`.
        expr: Option<String>,
        /// Sample this many random subsets instead of all of them.
        #[arg(long)]
        random: Option<usize>,
        /// Accept disjoint unions of wedges.
        #[arg(long)]
        allow_disjoint: bool,
        /// Check the suspension of each complex.
        #[arg(long)]
        suspend: bool,
        #[arg(long)]
        no_engine: bool,
        /// The four exhaustive product sweeps of the acceptance suite.
        #[arg(long)]
        suite: bool,
        /// Instead of sweeping, check vanishing homology through this dimension.
        #[arg(long)]
        connectivity: Option<i32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("icx: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn order(name: &str) -> Result<RuleOrder> {
    RuleOrder::named(name)
        .with_context(|| format!("unknown strategy {name:?}; known: {}", RuleOrder::preset_names().join(", ")))
}

fn run(cli: Cli) -> Result<bool> {
    let out = std::io::stdout();
    let mut out = out.lock();
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    match &cli.command {
        Command::Graph { expr } => {
            writeln!(out, "{}", parse_graph(expr)?.to_json())?;
        }
        Command::Complex { expr } => {
            let k = independence_complex(&parse_graph(expr)?, None, budget)?;
            for f in k.iter_faces() {
                let v = face_vertices(f);
                match cli.format {
                    Format::Json => {
                        let d = v.len() as i32 - 1;
                        writeln!(out, "{}", serde_json::json!({"dim": d, "face": v}))?
                    }
                    Format::Csv => {
                        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        writeln!(out, "{},{}", v.len() as i32 - 1, s.join(" "))?
                    }
                }
            }
            let fv: Vec<String> = k.f_vector().iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", fv.join(","))?;
        }
        Command::Homology { expr } => {
            let t = independence_homology(&parse_graph(expr)?, budget)?;
            let top = t.top_dim().unwrap_or(-1);
            match cli.format {
                Format::Json => {
                    for line in t.json_lines(-1, top) {
                        writeln!(out, "{line}")?;
                    }
                }
                Format::Csv => {
                    writeln!(out, "dim,rank,torsion")?;
                    for d in -1..=top {
                        let tor: Vec<String> = t.torsion(d).iter().map(|x| x.to_string()).collect();
                        writeln!(out, "{d},{},{}", t.rank(d), tor.join(";"))?;
                    }
                }
            }
        }
        Command::Reduce { expr, strategy, trace, fallback } => {
            let g = parse_graph(expr)?;
            let opts = ReduceOptions { oracle_fallback: *fallback, budget };
            match reduce_with(&g, &order(strategy)?, opts) {
                Ok(r) => {
                    let v = serde_json::json!({
                        "ht": r.ht.to_string(),
                        "betti": r.ht.to_betti().to_string(),
                        "certification": r.certification,
                        "strategy": strategy,
                    });
                    writeln!(out, "{v}")?;
                    if *trace {
                        for line in r.trace.json_lines() {
                            writeln!(out, "{line}")?;
                        }
                    }
                }
                Err(icx_core::ReduceError::Stuck { vertices, graph }) => {
                    writeln!(out, "{}", serde_json::json!({"stuck": vertices, "graph": graph}))?;
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Predict { family, params } => {
            let key = PredictionKey::new(family.parse()?, params)?;
            let p = key.predict()?;
            writeln!(out, "{}", serde_json::json!({"key": key.id(), "ht": p.ht().map(|h| h.to_string()), "betti": p.betti().to_string()}))?;
        }
        Command::Verify { key, family, params, graph, suite, acceptance, engine, strategy, timeout, out: dir, no_cache } => {
            if *acceptance {
                let budget = cli.budget.unwrap_or(suite::SUITE_BUDGET);
                let cfg = suite::SuiteConfig { seed: cli.seed, workers: cli.workers, engine: *engine, budget, ..Default::default() };
                let a = suite::run_suite(&cfg)?;
                let b = suite::run_suite(&cfg)?;
                let criteria = suite::evaluate(&a, Some(&b));
                for c in &criteria {
                    writeln!(out, "{}", c.line())?;
                }
                if let Some(dir) = dir {
                    report::emit(dir, "verify", &a.reports)?;
                }
                return Ok(criteria.iter().all(|c| c.pass));
            }
            let mut cases: Vec<Case> = Vec::new();
            for k in key {
                cases.push(Case::Key(k.parse()?));
            }
            if let Some(f) = family {
                cases.push(Case::Key(PredictionKey::new(f.parse()?, params)?));
            }
            for g in graph {
                cases.push(Case::Graph { name: g.clone(), graph: parse_graph(g)? });
            }
            if *suite {
                cases.extend(suite::suite_keys().into_iter().map(|(_, k)| Case::Key(k)));
            }
            if cases.is_empty() {
                bail!("nothing to verify: pass --key, --family, --graph, --suite or --acceptance");
            }
            let budget = cli.budget.unwrap_or(if *suite { suite::SUITE_BUDGET } else { DEFAULT_BUDGET });
            let opts = VerifyOptions {
                budget,
                engine: *engine,
                order: order(strategy)?,
                timeout: Duration::from_secs(*timeout),
                ..VerifyOptions::default()
            };
            let cache = if *no_cache { None } else { Some(Cache::open(&cli.cache_dir)?) };
            let (reports, stats) = verify::run_cases(&cases, &opts, cache.as_ref(), cli.force, &verify::pool(cli.workers)?)?;
            emit_reports(&mut out, cli.format, &reports)?;
            if let Some(dir) = dir {
                report::emit(dir, "verify", &reports)?;
            }
            let bad = reports.iter().filter(|r| !r.ok()).count();
            eprintln!("{} cases, {bad} failing, {} cache hits", reports.len(), stats.cache_hits);
            return Ok(bad == 0);
        }
        Command::Sweep { expr, random, allow_disjoint, suspend, no_engine, suite, connectivity } => {
            let mut targets = Vec::new();
            if let Some(e) = expr {
                targets.push((e.clone(), parse_graph(e)?));
            }
            if *suite {
                for e in ["cat(path(4),path(3))", "cat(path(3),path(4))", "strong(path(4),path(3))", "strong(path(3),path(4))"] {
                    targets.push((e.to_string(), parse_graph(e)?));
                }
            }
            if targets.is_empty() {
                bail!("nothing to sweep: pass a graph expression or --suite");
            }
            if let Some(bound) = connectivity {
                let mut ok = true;
                for (name, g) in &targets {
                    let r = sweep::connectivity_check(name, g, *bound, budget)?;
                    ok &= r.holds;
                    writeln!(out, "{}", serde_json::to_string(&r)?)?;
                }
                return Ok(ok);
            }
            let cfg = SweepConfig {
                mode: random.map_or(SampleMode::Exhaustive, |count| SampleMode::Random { count, seed: cli.seed }),
                budget,
                engine: !no_engine,
                single_component: !allow_disjoint,
                suspend: *suspend,
            };
            let cache = Cache::open(&cli.cache_dir)?;
            let pool = verify::pool(cli.workers)?;
            let mut summaries = Vec::new();
            let mut hits = 0;
            for (name, g) in &targets {
                let key = format!(
                    "sweep_{}_{}_{}{}{}",
                    g.canonical_hash(),
                    cfg.mode,
                    cfg.engine as u8,
                    cfg.single_component as u8,
                    cfg.suspend as u8
                );
                let cached = (!cli.force).then(|| cache.get::<SweepSummary>(&key)).flatten();
                let s = match cached.filter(|s| s.violations() == 0 && &s.graph == name) {
                    Some(s) => {
                        hits += 1;
                        s
                    }
                    None => {
                        let s = sweep::sw_sweep(name, g, &cfg, &pool);
                        cache.put(&key, &s)?;
                        s
                    }
                };
                summaries.push(s);
            }
            match cli.format {
                Format::Json => {
                    for s in &summaries {
                        writeln!(out, "{}", serde_json::to_string(s)?)?;
                    }
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["graph", "sampling", "subgraphs", "torsion", "shape", "certified", "consistent", "millis"])?;
                    for s in &summaries {
                        w.write_record([
                            s.graph.clone(),
                            s.sampling.to_string(),
                            s.subgraphs.to_string(),
                            s.torsion_findings.len().to_string(),
                            s.shape_findings.len().to_string(),
                            s.certified.to_string(),
                            s.consistent.to_string(),
                            s.millis.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            eprintln!("{} sweeps, {hits} cache hits", summaries.len());
            return Ok(summaries.iter().all(|s| s.violations() == 0));
        }
    }
    Ok(true)
}

fn emit_reports<W: Write>(out: &mut W, format: Format, reports: &[VerifyReport]) -> Result<()> {
    match format {
        Format::Json => report::write_jsonl(out, reports)?,
        Format::Csv => report::write_csv(out, reports)?,
    }
    Ok(())
}
