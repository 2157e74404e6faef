//! Virtual-table operators and the runtime that invokes them with a
//! signature-keyed cache.

mod cache;
mod clock;
mod fetch;
mod lexicon;
pub mod operators;
mod processor;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::vsql::{OperatorInvocation, SourceProvider, VirtualTable};

pub use cache::CacheEntry;
pub use clock::{Clock, ManualClock, SystemClock};
pub use fetch::{replay_key, FetchError, Fetcher, Response, Secret, WebFetcher};
pub use lexicon::{escape_line, unescape_line, Lexicon, LexiconError};
pub use processor::{process_attribute, AttributeProcessorSpec, Processed, ProcessorKind};

use cache::Cache;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceErrorKind {
    UnknownOperator,
    InvalidArgs,
    /// The upstream source could not be retrieved or understood.
    Fetch,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("operator {signature}: {message}")]
pub struct SourceError {
    pub operator: String,
    pub signature: String,
    pub kind: SourceErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OperatorError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("fetch failed: {0}")]
    Fetch(String),
}

impl From<FetchError> for OperatorError {
    fn from(e: FetchError) -> Self {
        OperatorError::Fetch(e.to_string())
    }
}

/// One source element as ordered ⟨attribute, value⟩ pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceRecord {
    pub attributes: Vec<(String, Option<String>)>,
}

impl SourceRecord {
    pub fn new(attributes: Vec<(String, Option<String>)>) -> Self {
        Self { attributes }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.as_deref())
    }
}

/// What an operator can use while fetching.
pub struct FetchContext<'a> {
    pub fetcher: &'a dyn Fetcher,
    warnings: &'a AtomicU64,
}

impl FetchContext<'_> {
    pub fn warn(&self, message: &str) {
        tracing::warn!("{message}");
        self.warnings.fetch_add(1, Ordering::SeqCst);
    }
}

pub trait Operator: Send + Sync {
    /// Static argument check, run when mappings are loaded.
    fn check_args(&self, _inv: &OperatorInvocation) -> Result<(), String> {
        Ok(())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError>;

    /// Attribute processors applied to every fetched record.
    fn processors(&self, _inv: &OperatorInvocation) -> Vec<AttributeProcessorSpec> {
        Vec::new()
    }
}

/// Operators by lowercase name.
#[derive(Clone, Default)]
pub struct Registry {
    operators: BTreeMap<String, Arc<dyn Operator>>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.operators.keys()).finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, op: Arc<dyn Operator>) -> &mut Self {
        self.operators.insert(name.to_ascii_lowercase(), op);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn Operator>> {
        self.operators.get(&name.to_ascii_lowercase())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.operators.keys().map(String::as_str)
    }

    pub fn check(&self, inv: &OperatorInvocation) -> Result<(), SourceError> {
        let op = self.get(&inv.name).ok_or_else(|| {
            source_error(
                inv,
                SourceErrorKind::UnknownOperator,
                "operator is not registered".into(),
            )
        })?;
        op.check_args(inv)
            .map_err(|m| source_error(inv, SourceErrorKind::InvalidArgs, m))
    }
}

fn source_error(inv: &OperatorInvocation, kind: SourceErrorKind, message: String) -> SourceError {
    SourceError {
        operator: inv.name.clone(),
        signature: inv.signature().to_string(),
        kind,
        message,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuntimeConfig {
    /// Directory mirroring cache entries on disk.
    pub spill_dir: Option<PathBuf>,
    /// Serve an expired entry when fetching fails.
    pub serve_stale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    pub fetches: u64,
    pub warnings: u64,
    pub api_calls: u64,
}

#[derive(Debug, Default)]
struct Counters {
    hits: AtomicU64,
    misses: AtomicU64,
    fetches: AtomicU64,
    warnings: AtomicU64,
}

/// Invokes operators with the cache window semantics of `f`:
/// a stored table younger than `f` ms is returned without fetching; with `f`
/// absent or negative nothing is read from or written to the cache.
pub struct VTableRuntime {
    registry: Registry,
    fetcher: Arc<dyn Fetcher>,
    clock: Arc<dyn Clock>,
    cache: Cache,
    config: RuntimeConfig,
    counters: Counters,
    fetches_by_signature: std::sync::Mutex<HashMap<String, u64>>,
}

impl fmt::Debug for VTableRuntime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VTableRuntime")
            .field("registry", &self.registry)
            .field("clock", &self.clock)
            .field("config", &self.config)
            .finish()
    }
}

impl VTableRuntime {
    pub fn new(
        registry: Registry,
        fetcher: Arc<dyn Fetcher>,
        clock: Arc<dyn Clock>,
        config: RuntimeConfig,
    ) -> Self {
        Self {
            registry,
            fetcher,
            clock,
            cache: Cache::new(config.spill_dir.clone()),
            config,
            counters: Counters::default(),
            fetches_by_signature: Default::default(),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.cache.len(),
            hits: self.counters.hits.load(Ordering::SeqCst),
            misses: self.counters.misses.load(Ordering::SeqCst),
            fetches: self.counters.fetches.load(Ordering::SeqCst),
            warnings: self.counters.warnings.load(Ordering::SeqCst),
            api_calls: self.fetcher.calls(),
        }
    }

    /// Fetch count per operator signature.
    pub fn fetch_counts(&self) -> HashMap<String, u64> {
        self.fetches_by_signature
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .clone()
    }

    pub fn clear_cache(&self) {
        self.cache.clear();
    }

    pub fn cached(&self, inv: &OperatorInvocation) -> Option<CacheEntry> {
        self.cache.get(&inv.signature())
    }

    pub fn invoke(&self, inv: &OperatorInvocation) -> Result<Arc<VirtualTable>, SourceError> {
        self.invoke_at(inv, self.clock.now_ms())
    }

    pub fn invoke_at(
        &self,
        inv: &OperatorInvocation,
        now: i64,
    ) -> Result<Arc<VirtualTable>, SourceError> {
        self.invoke_reporting(inv, now).map(|(t, _)| t)
    }

    /// Like [`invoke_at`](Self::invoke_at), also telling whether the source
    /// was fetched (as opposed to served from the cache).
    pub fn invoke_reporting(
        &self,
        inv: &OperatorInvocation,
        now: i64,
    ) -> Result<(Arc<VirtualTable>, bool), SourceError> {
        let op = self.registry.get(&inv.name).ok_or_else(|| {
            source_error(
                inv,
                SourceErrorKind::UnknownOperator,
                "operator is not registered".into(),
            )
        })?;
        let sig = inv.signature();
        let window = inv.f.filter(|f| *f >= 0);
        let previous = window.and_then(|_| self.cache.get(&sig));
        if let (Some(f), Some(entry)) = (window, &previous) {
            if (entry.stored_at as i128 - now as i128).abs() < f as i128 {
                self.counters.hits.fetch_add(1, Ordering::SeqCst);
                tracing::debug!(signature = %sig, "cache hit");
                return Ok((entry.table.clone(), false));
            }
        }
        if window.is_some() {
            self.counters.misses.fetch_add(1, Ordering::SeqCst);
        }

        self.counters.fetches.fetch_add(1, Ordering::SeqCst);
        *self
            .fetches_by_signature
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .entry(sig.to_string())
            .or_default() += 1;
        tracing::debug!(signature = %sig, "fetching");
        let ctx = FetchContext {
            fetcher: self.fetcher.as_ref(),
            warnings: &self.counters.warnings,
        };
        let table = match op.fetch(inv, &ctx).and_then(|mut records| {
            let failures = processor::apply_processors(&op.processors(inv), &mut records);
            if failures > 0 {
                self.counters
                    .warnings
                    .fetch_add(failures as u64, Ordering::SeqCst);
            }
            build_table(records)
        }) {
            Ok(t) => Arc::new(t),
            Err(e) => {
                let kind = match e {
                    OperatorError::InvalidArgs(_) => SourceErrorKind::InvalidArgs,
                    OperatorError::Fetch(_) => SourceErrorKind::Fetch,
                };
                if let (true, Some(entry)) = (self.config.serve_stale, previous) {
                    ctx.warn(&format!("operator {sig}: {e}; serving stale table"));
                    return Ok((entry.table, true));
                }
                return Err(source_error(inv, kind, e.to_string()));
            }
        };
        if window.is_some() {
            self.cache.put(CacheEntry {
                signature: sig,
                stored_at: now,
                table: table.clone(),
            });
        }
        Ok((table, true))
    }
}

impl SourceProvider for VTableRuntime {
    fn invoke(&self, inv: &OperatorInvocation) -> Result<Arc<VirtualTable>, SourceError> {
        VTableRuntime::invoke(self, inv)
    }
}

/// Rows `[tupleID, attributes...]`; columns are the attribute names in order
/// of first appearance, absent attributes are NULL.
pub fn build_table(records: Vec<SourceRecord>) -> Result<VirtualTable, OperatorError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for r in &records {
        for (n, _) in &r.attributes {
            if !index.contains_key(n) {
                index.insert(n.clone(), names.len());
                names.push(n.clone());
            }
        }
    }
    let cells = records
        .into_iter()
        .map(|r| {
            let mut row = vec![None; names.len()];
            for (n, v) in r.attributes {
                row[index[&n]] = v;
            }
            row
        })
        .collect();
    VirtualTable::from_cells(names, cells).map_err(OperatorError::Fetch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vtable::operators::StaticTables;

    fn runtime(clock: Arc<ManualClock>, config: RuntimeConfig) -> VTableRuntime {
        let mut reg = Registry::new();
        let tables = StaticTables::new();
        tables.insert("t", vec!["a".into()], vec![vec![Some("1".into())]]);
        tables.insert("u", vec!["a".into()], vec![vec![Some("2".into())]]);
        reg.register("mem", Arc::new(tables));
        VTableRuntime::new(reg, Arc::new(WebFetcher::new(".")), clock, config)
    }

    fn inv(name: &str, f: Option<i64>) -> OperatorInvocation {
        OperatorInvocation::new("mem", vec![("name".into(), name.into())], f)
    }

    #[test]
    fn window_semantics() {
        let clock = Arc::new(ManualClock::new(1_000));
        let rt = runtime(clock.clone(), RuntimeConfig::default());
        rt.invoke(&inv("t", Some(10_000))).unwrap();
        clock.advance(1);
        rt.invoke(&inv("t", Some(10_000))).unwrap();
        assert_eq!(rt.stats().fetches, 1);
        assert_eq!(rt.stats().hits, 1);
        clock.advance(10_000);
        rt.invoke(&inv("t", Some(10_000))).unwrap();
        assert_eq!(rt.stats().fetches, 2);
        rt.invoke(&inv("u", Some(10_000))).unwrap();
        assert_eq!(rt.stats().fetches, 3);
        assert_eq!(rt.stats().entries, 2);
    }

    #[test]
    fn negative_or_absent_window_stores_nothing() {
        let clock = Arc::new(ManualClock::new(0));
        let rt = runtime(clock, RuntimeConfig::default());
        for _ in 0..3 {
            rt.invoke(&inv("t", Some(-1))).unwrap();
            rt.invoke(&inv("t", None)).unwrap();
        }
        assert_eq!(rt.stats().fetches, 6);
        assert_eq!(rt.stats().entries, 0);
        assert_eq!(rt.stats().hits + rt.stats().misses, 0);
    }

    #[test]
    fn zero_window_stores_but_never_hits() {
        let clock = Arc::new(ManualClock::new(0));
        let rt = runtime(clock, RuntimeConfig::default());
        rt.invoke(&inv("t", Some(0))).unwrap();
        rt.invoke(&inv("t", Some(0))).unwrap();
        assert_eq!(rt.stats().fetches, 2);
        assert_eq!(rt.stats().entries, 1);
    }

    #[test]
    fn unknown_operator() {
        let rt = runtime(Arc::new(ManualClock::new(0)), RuntimeConfig::default());
        let err = rt
            .invoke(&OperatorInvocation::new("nope", vec![], None))
            .unwrap_err();
        assert_eq!(err.kind, SourceErrorKind::UnknownOperator);
    }

    #[test]
    fn spill_directory_survives_runtime() {
        let dir = tempfile::tempdir().unwrap();
        let config = RuntimeConfig {
            spill_dir: Some(dir.path().to_path_buf()),
            serve_stale: false,
        };
        let clock = Arc::new(ManualClock::new(0));
        let rt = runtime(clock.clone(), config.clone());
        rt.invoke(&inv("t", Some(1_000))).unwrap();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        let rt2 = runtime(clock, config);
        rt2.invoke(&inv("t", Some(1_000))).unwrap();
        assert_eq!(rt2.stats().fetches, 0);
        assert_eq!(rt2.stats().hits, 1);
    }

    #[test]
    fn build_table_fills_missing_attributes() {
        let t = build_table(vec![
            SourceRecord::new(vec![("a".into(), Some("1".into()))]),
            SourceRecord::new(vec![("b".into(), Some("2".into()))]),
        ])
        .unwrap();
        assert_eq!(t.columns(), &["tupleID", "a", "b"]);
        assert_eq!(t.rows()[1], vec![Some("2".into()), None, Some("2".into())]);
    }
}
