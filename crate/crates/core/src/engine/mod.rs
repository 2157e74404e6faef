//! Query answering by unfolding: each triple pattern is matched against the
//! mapping targets, the resulting plan reads the mapping sources through the
//! virtual-table runtime, and solutions are assembled without ever building
//! the virtual graph.

mod execute;
mod plan;
mod render;

use std::sync::Arc;

use thiserror::Error;

use crate::mapping::{compile_targets, parse_mappings, MappingError, ObdaSpec};
use crate::rdf::{RdfGraph, SolutionMapping, Variable};
use crate::sparql::{parse_sparql, SparqlError, SparqlQuery};
use crate::vsql::{eval_vsql, VsqlError};
use crate::vtable::{SourceErrorKind, VTableRuntime};

pub use execute::{join, left_join, match_triple};
pub use plan::{pattern_matches, unfold, Atom, BgpPlan, Branch, ColumnFilter, PlanNode, QueryPlan};
pub use render::render_plan;

use execute::QueryScope;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Parse(#[from] SparqlError),
    #[error("mapping {mapping_id:?}: {source}")]
    Source {
        mapping_id: String,
        source: VsqlError,
    },
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

impl EngineError {
    /// The query itself is at fault.
    pub fn is_client(&self) -> bool {
        matches!(self, EngineError::Parse(_))
    }

    /// An upstream source could not be fetched or understood.
    pub fn is_upstream(&self) -> bool {
        matches!(
            self,
            EngineError::Source {
                source: VsqlError::Source(e),
                ..
            } if e.kind == SourceErrorKind::Fetch
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryOptions {
    /// Force `f = -1` on every invocation: always fetch, never store.
    pub no_cache: bool,
}

#[derive(Debug, Clone)]
pub struct QueryAnswer {
    pub variables: Vec<Variable>,
    pub solutions: Vec<SolutionMapping>,
    pub plan: QueryPlan,
    /// Operator invocations that went to the source rather than the cache.
    pub fetches: u64,
    pub warnings: Vec<String>,
}

/// Re-entrant: concurrent queries share only the runtime and its cache.
#[derive(Debug, Clone)]
pub struct Engine {
    spec: Arc<ObdaSpec>,
    runtime: Arc<VTableRuntime>,
}

impl Engine {
    pub fn new(spec: Arc<ObdaSpec>, runtime: Arc<VTableRuntime>) -> Self {
        Self { spec, runtime }
    }

    /// Parses and validates `mappings` against the runtime's registry.
    pub fn from_mappings(
        mappings: &str,
        runtime: Arc<VTableRuntime>,
    ) -> Result<Self, MappingError> {
        let spec = ObdaSpec::new(parse_mappings(mappings)?, runtime.registry())?;
        Ok(Self::new(Arc::new(spec), runtime))
    }

    pub fn spec(&self) -> &ObdaSpec {
        &self.spec
    }

    pub fn runtime(&self) -> &VTableRuntime {
        &self.runtime
    }

    pub fn answer(&self, text: &str) -> Result<QueryAnswer, EngineError> {
        self.answer_with(text, QueryOptions::default())
    }

    pub fn answer_with(&self, text: &str, opts: QueryOptions) -> Result<QueryAnswer, EngineError> {
        let query = parse_sparql(text)?;
        self.answer_query(&query, opts)
    }

    pub fn answer_query(
        &self,
        query: &SparqlQuery,
        opts: QueryOptions,
    ) -> Result<QueryAnswer, EngineError> {
        let plan = self.unfold(query);
        for w in &plan.warnings {
            tracing::warn!("{w}");
        }
        let scope = QueryScope::new(&self.spec, &self.runtime, opts.no_cache);
        let solutions = scope.run(&plan)?;
        let mut warnings = plan.warnings.clone();
        warnings.extend(scope.warnings.take());
        let fetches = *scope.fetches.borrow();
        Ok(QueryAnswer {
            variables: plan.projection.clone(),
            solutions,
            plan,
            fetches,
            warnings,
        })
    }

    pub fn unfold(&self, query: &SparqlQuery) -> QueryPlan {
        unfold(query, &self.spec)
    }

    pub fn render_plan(&self, plan: &QueryPlan) -> String {
        render_plan(plan, &self.spec)
    }

    /// Every triple of the virtual graph. Used as a reference in tests; the
    /// query path never calls it.
    pub fn materialize(&self) -> Result<RdfGraph, EngineError> {
        let mut graph = RdfGraph::new();
        for (i, axiom) in self.spec.mappings().axioms.iter().enumerate() {
            let table = eval_vsql(self.spec.source(i), self.runtime.as_ref()).map_err(|e| {
                EngineError::Source {
                    mapping_id: axiom.id.clone(),
                    source: e,
                }
            })?;
            if table.is_empty() {
                continue;
            }
            let targets = compile_targets(axiom, table.columns())?;
            for row in table.rows() {
                for t in &targets {
                    if let Some(triple) = t.instantiate(row) {
                        graph.insert(triple);
                    }
                }
            }
        }
        Ok(graph)
    }
}
