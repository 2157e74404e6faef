//! Reference evaluation of graph patterns over a materialized graph.
//!
//! This evaluator is deliberately naive (scan + nested-loop joins). It is the
//! semantic yardstick the unfolding engine is checked against.

use super::model::{GraphPattern, RdfGraph, SolutionMapping, TermPattern, Triple, TriplePattern};
use super::RdfError;

/// μ(t): substitutes every variable of `t`. Fails with [`RdfError::NotGround`]
/// when some variable of `t` is unbound in `mu`.
pub fn apply_mapping_to_pattern(
    mu: &SolutionMapping,
    t: &TriplePattern,
) -> Result<Triple, RdfError> {
    let resolve = |p: &TermPattern| match p {
        TermPattern::Term(term) => Ok(term.clone()),
        TermPattern::Var(v) => mu
            .get(v)
            .cloned()
            .ok_or_else(|| RdfError::NotGround(v.to_string())),
    };
    Triple::new(
        resolve(&t.subject)?,
        resolve(&t.predicate)?,
        resolve(&t.object)?,
    )
}

/// [[pattern]]_graph as a multiset (a `Vec` whose order carries no meaning).
pub fn evaluate_pattern(pattern: &GraphPattern, graph: &RdfGraph) -> Vec<SolutionMapping> {
    match pattern {
        GraphPattern::Bgp(tps) => {
            let mut acc = vec![SolutionMapping::new()];
            for tp in tps {
                acc = join(&acc, &evaluate_triple_pattern(tp, graph));
            }
            acc
        }
        GraphPattern::And(l, r) => join(&evaluate_pattern(l, graph), &evaluate_pattern(r, graph)),
        GraphPattern::Opt(l, r) => {
            left_outer_join(&evaluate_pattern(l, graph), &evaluate_pattern(r, graph))
        }
        GraphPattern::Union(l, r) => {
            let mut out = evaluate_pattern(l, graph);
            out.extend(evaluate_pattern(r, graph));
            out
        }
    }
}

/// {μ | dom(μ) = var(t) and μ(t) ∈ D}
pub fn evaluate_triple_pattern(tp: &TriplePattern, graph: &RdfGraph) -> Vec<SolutionMapping> {
    let mut out = Vec::new();
    'triples: for triple in graph.iter() {
        let mut mu = SolutionMapping::new();
        let ground = [triple.subject(), triple.predicate(), triple.object()];
        for (pat, term) in tp.positions().into_iter().zip(ground) {
            match pat {
                TermPattern::Term(c) => {
                    if c != term {
                        continue 'triples;
                    }
                }
                TermPattern::Var(v) => match mu.get(v) {
                    Some(bound) if bound != term => continue 'triples,
                    Some(_) => {}
                    None => {
                        mu.insert(v.clone(), term.clone());
                    }
                },
            }
        }
        out.push(mu);
    }
    out
}

pub fn join(left: &[SolutionMapping], right: &[SolutionMapping]) -> Vec<SolutionMapping> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            if let Some(m) = l.merge(r) {
                out.push(m);
            }
        }
    }
    out
}

pub fn left_outer_join(
    left: &[SolutionMapping],
    right: &[SolutionMapping],
) -> Vec<SolutionMapping> {
    let mut out = Vec::new();
    for l in left {
        let before = out.len();
        for r in right {
            if let Some(m) = l.merge(r) {
                out.push(m);
            }
        }
        if out.len() == before {
            out.push(l.clone());
        }
    }
    out
}

/// Canonical (sorted) form of a multiset of solutions, for order-insensitive comparison.
pub fn canonical_multiset(solutions: &[SolutionMapping]) -> Vec<SolutionMapping> {
    let mut v = solutions.to_vec();
    v.sort();
    v
}
