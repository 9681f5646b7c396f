//! Verification harness: prediction vs oracle vs engine, induced-subgraph
//! sweeps, a result cache and the acceptance suite behind the `icx` tool.

pub mod cache;
pub mod enumerate;
pub mod expr;
pub mod report;
pub mod suite;
pub mod sweep;
pub mod verify;

pub use cache::Cache;
pub use expr::parse_graph;
pub use report::{EngineOutcome, Verdict, VerifyReport};
pub use suite::{evaluate, run_suite, Criterion, SuiteConfig, SuiteRun};
pub use sweep::{connectivity_check, sw_sweep, SampleMode, SweepConfig, SweepSummary};
pub use verify::{run_cases, verify_case, Case, EngineMode, VerifyOptions};
