//! Time against table size for a low- and a high-selectivity query over
//! generated poll tables, with and without the operator cache.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use vweave_core::sparql::SparqlQuery;
use vweave_core::vtable::operators::StandardOptions;
use vweave_core::vtable::{Registry, RuntimeConfig, SystemClock, VTableRuntime, WebFetcher};
use vweave_core::{parse_sparql, Engine, QueryOptions};

use crate::polls::{write_webtable, SyntheticTableSpec};
use crate::report::{median, BenchReport, BenchRow};
use crate::BenchError;

pub const MAPPINGS: &str = include_str!("../../../fixtures/polls/mappings.obda");
/// Every poll with its date and lead.
pub const Q_LOW: &str = include_str!("../../../fixtures/polls/q-low.rq");
/// Polls whose lead is exactly 1.5.
pub const Q_HIGH: &str = include_str!("../../../fixtures/polls/q-high.rq");

#[derive(Debug, Clone)]
pub struct ScalabilityConfig {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub planted: usize,
    pub seed: u64,
    /// Generated tables go to `<work_dir>/size-<n>/polls.html`.
    pub work_dir: PathBuf,
    /// Run the warm repetitions concurrently against one shared cache.
    pub parallel: bool,
}

impl ScalabilityConfig {
    pub fn new(work_dir: impl Into<PathBuf>) -> Self {
        Self {
            sizes: vec![10, 100, 1_000, 10_000, 100_000],
            repeats: 3,
            planted: 2,
            seed: 42,
            work_dir: work_dir.into(),
            parallel: false,
        }
    }
}

/// Engine over a directory holding `polls.html`.
pub fn polls_engine(dir: impl Into<PathBuf>) -> Result<Engine, BenchError> {
    let runtime = Arc::new(VTableRuntime::new(
        Registry::standard(&StandardOptions::default()),
        Arc::new(WebFetcher::new(dir)),
        Arc::new(SystemClock),
        RuntimeConfig::default(),
    ));
    Ok(Engine::from_mappings(MAPPINGS, runtime)?)
}

struct Measured {
    ms: f64,
    fetches: u64,
    results: usize,
}

fn run_once(engine: &Engine, q: &SparqlQuery, no_cache: bool) -> Result<Measured, BenchError> {
    let start = Instant::now();
    let a = engine.answer_query(q, QueryOptions { no_cache })?;
    Ok(Measured {
        ms: start.elapsed().as_secs_f64() * 1000.0,
        fetches: a.fetches,
        results: a.solutions.len(),
    })
}

fn repeated(
    engine: &Engine,
    q: &SparqlQuery,
    no_cache: bool,
    repeats: usize,
    parallel: bool,
) -> Result<Vec<Measured>, BenchError> {
    if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..repeats)
                .map(|_| s.spawn(|| run_once(engine, q, no_cache)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("benchmark thread panicked"))
                .collect()
        })
    } else {
        (0..repeats)
            .map(|_| run_once(engine, q, no_cache))
            .collect()
    }
}

fn measure(
    engine: &Engine,
    q: &SparqlQuery,
    mode: &str,
    repeats: usize,
    parallel: bool,
) -> Result<(f64, u64, u64, usize), BenchError> {
    let cold = mode == "cold";
    // first run warms code paths (cold) or fills the cache (warm) and is discarded
    run_once(engine, q, cold)?;
    let before = engine.runtime().stats().api_calls;
    let runs = repeated(engine, q, cold, repeats, parallel && !cold)?;
    let api_calls = engine.runtime().stats().api_calls - before;
    let mut times: Vec<f64> = runs.iter().map(|m| m.ms).collect();
    let fetches = runs.iter().map(|m| m.fetches).max().unwrap_or(0);
    let results = runs.last().map_or(0, |m| m.results);
    Ok((median(&mut times), fetches, api_calls, results))
}

/// Generates one table per size and times both queries cold and warm.
/// A failing cell is recorded with its error and the run continues.
pub fn run_scalability(cfg: &ScalabilityConfig) -> Result<BenchReport, BenchError> {
    let queries = [
        (
            "q-low",
            parse_sparql(Q_LOW).map_err(vweave_core::EngineError::from)?,
        ),
        (
            "q-high",
            parse_sparql(Q_HIGH).map_err(vweave_core::EngineError::from)?,
        ),
    ];
    let repeats = cfg.repeats.max(1);
    let mut report = BenchReport::default();
    for &size in &cfg.sizes {
        let dir = cfg.work_dir.join(format!("size-{size}"));
        let prepared = SyntheticTableSpec::new(size, cfg.planted.min(size))
            .and_then(|spec| write_webtable(&dir.join("polls.html"), &spec, cfg.seed))
            .and_then(|_| polls_engine(&dir));
        for (name, q) in &queries {
            let expected = if *name == "q-low" {
                size
            } else {
                cfg.planted.min(size)
            };
            for mode in ["cold", "warm"] {
                let mut row = BenchRow {
                    query: name.to_string(),
                    mode: mode.to_string(),
                    size,
                    expected,
                    ..BenchRow::default()
                };
                let outcome = match &prepared {
                    Ok(engine) => measure(engine, q, mode, repeats, cfg.parallel),
                    Err(e) => Err(BenchError::Setup(e.to_string())),
                };
                match outcome {
                    Ok((ms, fetches, api_calls, results)) => {
                        row.wall_clock_ms = ms;
                        row.fetch_count = fetches;
                        row.api_call_count = api_calls;
                        row.result_count = results;
                        if results != expected {
                            row.error = Some(format!("expected {expected} rows, got {results}"));
                        }
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                tracing::info!(
                    query = %row.query,
                    mode = %row.mode,
                    size,
                    ms = row.wall_clock_ms,
                    fetches = row.fetch_count,
                    "measured"
                );
                report.rows.push(row);
            }
        }
    }
    Ok(report)
}
