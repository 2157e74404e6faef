use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::plan::{Atom, BgpPlan, PlanNode, QueryPlan};
use super::EngineError;
use crate::mapping::{lexical_form_is_valid, MappingError, ObdaSpec, TermTemplate};
use crate::rdf::{SolutionMapping, Term, TermPattern, Triple, TriplePattern, Variable};
use crate::vsql::{
    eval_vsql, resolve_column, OperatorInvocation, OperatorSignature, SourceProvider, VirtualTable,
};
use crate::vtable::{SourceError, VTableRuntime};

/// Per-query state: operator results and views are computed once per query.
pub(crate) struct QueryScope<'a> {
    spec: &'a ObdaSpec,
    runtime: &'a VTableRuntime,
    no_cache: bool,
    invocations: RefCell<HashMap<OperatorSignature, Arc<VirtualTable>>>,
    views: RefCell<HashMap<String, Arc<VirtualTable>>>,
    pub(crate) fetches: RefCell<u64>,
    pub(crate) warnings: RefCell<Vec<String>>,
}

impl SourceProvider for QueryScope<'_> {
    fn invoke(&self, inv: &OperatorInvocation) -> Result<Arc<VirtualTable>, SourceError> {
        let sig = inv.signature();
        if let Some(t) = self.invocations.borrow().get(&sig) {
            return Ok(t.clone());
        }
        let now = self.runtime.clock().now_ms();
        let (table, fetched) = if self.no_cache {
            let mut cold = inv.clone();
            cold.f = Some(-1);
            self.runtime.invoke_reporting(&cold, now)?
        } else {
            self.runtime.invoke_reporting(inv, now)?
        };
        if fetched {
            *self.fetches.borrow_mut() += 1;
        }
        self.invocations.borrow_mut().insert(sig, table.clone());
        Ok(table)
    }
}

impl<'a> QueryScope<'a> {
    pub(crate) fn new(spec: &'a ObdaSpec, runtime: &'a VTableRuntime, no_cache: bool) -> Self {
        Self {
            spec,
            runtime,
            no_cache,
            invocations: RefCell::default(),
            views: RefCell::default(),
            fetches: RefCell::new(0),
            warnings: RefCell::default(),
        }
    }

    /// The evaluated source of axiom `i`; axioms with the same source text share it.
    pub(crate) fn view(&self, i: usize) -> Result<Arc<VirtualTable>, EngineError> {
        let source = self.spec.source(i);
        let key = source.to_string();
        if let Some(t) = self.views.borrow().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(eval_vsql(source, self).map_err(|e| EngineError::Source {
            mapping_id: self.spec.mappings().axioms[i].id.clone(),
            source: e,
        })?);
        self.views.borrow_mut().insert(key, table.clone());
        Ok(table)
    }

    fn warn(&self, message: String) {
        tracing::warn!("{message}");
        let mut w = self.warnings.borrow_mut();
        if !w.contains(&message) {
            w.push(message);
        }
    }

    pub(crate) fn run(&self, plan: &QueryPlan) -> Result<Vec<SolutionMapping>, EngineError> {
        let solutions = self.node(&plan.root)?;
        let projected = solutions.iter().map(|mu| mu.project(&plan.projection));
        Ok(if plan.distinct {
            dedup(projected)
        } else {
            projected.collect()
        })
    }

    fn node(&self, n: &PlanNode) -> Result<Vec<SolutionMapping>, EngineError> {
        Ok(match n {
            PlanNode::Bgp(b) => self.bgp(b)?,
            PlanNode::Join(l, r) => join(&self.node(l)?, &self.node(r)?),
            PlanNode::LeftJoin(l, r) => left_join(&self.node(l)?, &self.node(r)?),
            PlanNode::Union(l, r) => {
                let mut out = self.node(l)?;
                out.extend(self.node(r)?);
                out
            }
        })
    }

    fn bgp(&self, b: &BgpPlan) -> Result<Vec<SolutionMapping>, EngineError> {
        if b.patterns.is_empty() {
            return Ok(vec![SolutionMapping::new()]);
        }
        let mut atom_results: HashMap<(usize, &Atom), Vec<SolutionMapping>> = HashMap::new();
        let mut out = Vec::new();
        for branch in &b.branches {
            let mut acc = vec![SolutionMapping::new()];
            for (i, (tp, atom)) in b.patterns.iter().zip(&branch.atoms).enumerate() {
                if let std::collections::hash_map::Entry::Vacant(e) = atom_results.entry((i, atom))
                {
                    let sols = self.atom(tp, atom)?;
                    e.insert(sols);
                }
                acc = join(&acc, &atom_results[&(i, atom)]);
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc);
        }
        // the virtual graph is a set, so a BGP answer has no duplicates
        Ok(dedup(out))
    }

    /// Solutions of one triple pattern over the triples one target produces.
    fn atom(&self, tp: &TriplePattern, atom: &Atom) -> Result<Vec<SolutionMapping>, EngineError> {
        let axiom = &self.spec.mappings().axioms[atom.axiom];
        let table = self.view(atom.axiom)?;
        if table.is_empty() {
            return Ok(vec![]);
        }
        let target = &axiom.targets[atom.target];
        let compiled =
            target
                .compile(table.columns())
                .map_err(|column| MappingError::MissingColumn {
                    mapping_id: axiom.id.clone(),
                    column,
                    available: table.columns().to_vec(),
                })?;
        let mut filters = Vec::with_capacity(atom.filters.len());
        for f in &atom.filters {
            let idx = resolve_column(table.columns(), &f.column).ok_or_else(|| {
                MappingError::MissingColumn {
                    mapping_id: axiom.id.clone(),
                    column: f.column.clone(),
                    available: table.columns().to_vec(),
                }
            })?;
            filters.push((idx, f.value.as_str()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut invalid_lexical = None;
        for row in table.rows() {
            if !filters.iter().all(|(i, v)| row[*i].as_deref() == Some(*v)) {
                continue;
            }
            let Some(triple) = compiled.instantiate(row) else {
                continue;
            };
            if invalid_lexical.is_none() {
                invalid_lexical = ill_typed(&triple, &target.object);
            }
            if let Some(mu) = match_triple(tp, &triple) {
                if seen.insert(mu.clone()) {
                    out.push(mu);
                }
            }
        }
        if let Some(msg) = invalid_lexical {
            self.warn(format!("mapping {:?}: {msg}", axiom.id));
        }
        Ok(out)
    }
}

fn ill_typed(triple: &Triple, object: &TermTemplate) -> Option<String> {
    let TermTemplate::Literal {
        datatype: Some(dt), ..
    } = object
    else {
        return None;
    };
    let lexical = triple.object().value();
    (!lexical_form_is_valid(lexical, dt))
        .then(|| format!("value {lexical:?} is not a valid lexical form of <{dt}>"))
}

/// The mapping μ with dom(μ) = var(tp) and μ(tp) = triple, if any.
pub fn match_triple(tp: &TriplePattern, triple: &Triple) -> Option<SolutionMapping> {
    let mut mu = SolutionMapping::new();
    let ground = [triple.subject(), triple.predicate(), triple.object()];
    for (pat, term) in tp.positions().into_iter().zip(ground) {
        match pat {
            TermPattern::Term(c) if c != term => return None,
            TermPattern::Term(_) => {}
            TermPattern::Var(v) => match mu.get(v) {
                Some(bound) if bound != term => return None,
                Some(_) => {}
                None => {
                    mu.insert(v.clone(), term.clone());
                }
            },
        }
    }
    Some(mu)
}

fn dedup(items: impl IntoIterator<Item = SolutionMapping>) -> Vec<SolutionMapping> {
    let mut seen = HashSet::new();
    items
        .into_iter()
        .filter(|mu| seen.insert(mu.clone()))
        .collect()
}

fn domain_of(mu: &SolutionMapping) -> Vec<Variable> {
    mu.iter().map(|(v, _)| v.clone()).collect()
}

/// Right-hand mappings grouped by domain, each group hash-indexed on demand
/// by the variables it shares with a left domain.
struct Probe<'r> {
    right: &'r [SolutionMapping],
    groups: Vec<(Vec<Variable>, Vec<usize>)>,
    indexes: HashMap<Vec<Variable>, Vec<Index>>,
}

struct Index {
    shared: Vec<Variable>,
    buckets: HashMap<Vec<Term>, Vec<usize>>,
}

impl<'r> Probe<'r> {
    fn new(right: &'r [SolutionMapping]) -> Self {
        let mut pos: HashMap<Vec<Variable>, usize> = HashMap::new();
        let mut groups: Vec<(Vec<Variable>, Vec<usize>)> = Vec::new();
        for (i, mu) in right.iter().enumerate() {
            let d = domain_of(mu);
            let g = *pos.entry(d.clone()).or_insert_with(|| {
                groups.push((d, Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(i);
        }
        Self {
            right,
            groups,
            indexes: HashMap::new(),
        }
    }

    /// Indices of right mappings compatible with `mu`, in input order per group.
    fn matches(&mut self, mu: &SolutionMapping, out: &mut Vec<usize>) {
        let domain = domain_of(mu);
        if !self.indexes.contains_key(&domain) {
            let built = self
                .groups
                .iter()
                .map(|(gd, members)| {
                    let shared: Vec<Variable> =
                        gd.iter().filter(|v| domain.contains(v)).cloned().collect();
                    let mut buckets: HashMap<Vec<Term>, Vec<usize>> = HashMap::new();
                    for &i in members {
                        buckets
                            .entry(key(&self.right[i], &shared))
                            .or_default()
                            .push(i);
                    }
                    Index { shared, buckets }
                })
                .collect();
            self.indexes.insert(domain.clone(), built);
        }
        out.clear();
        for idx in &self.indexes[&domain] {
            if let Some(hits) = idx.buckets.get(&key(mu, &idx.shared)) {
                out.extend_from_slice(hits);
            }
        }
    }
}

fn key(mu: &SolutionMapping, vars: &[Variable]) -> Vec<Term> {
    vars.iter()
        .map(|v| mu.get(v).cloned().expect("shared variable is bound"))
        .collect()
}

/// Ω1 ⋈ Ω2 with bag semantics, hash-partitioned on shared variables.
pub fn join(left: &[SolutionMapping], right: &[SolutionMapping]) -> Vec<SolutionMapping> {
    let mut probe = Probe::new(right);
    let mut hits = Vec::new();
    let mut out = Vec::new();
    for mu in left {
        probe.matches(mu, &mut hits);
        out.extend(hits.iter().filter_map(|&i| mu.merge(&right[i])));
    }
    out
}

/// Ω1 ⟕ Ω2: the join plus left mappings with no compatible partner.
pub fn left_join(left: &[SolutionMapping], right: &[SolutionMapping]) -> Vec<SolutionMapping> {
    let mut probe = Probe::new(right);
    let mut hits = Vec::new();
    let mut out = Vec::new();
    for mu in left {
        probe.matches(mu, &mut hits);
        if hits.is_empty() {
            out.push(mu.clone());
        } else {
            out.extend(hits.iter().filter_map(|&i| mu.merge(&right[i])));
        }
    }
    out
}
