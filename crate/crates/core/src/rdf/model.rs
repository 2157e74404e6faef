use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::term::Term;
use super::RdfError;

/// A ground triple. Subject is an IRI or blank node, predicate an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::Position("subject", subject.to_string()));
        }
        if !predicate.is_iri() {
            return Err(RdfError::Position("predicate", predicate.to_string()));
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A finite set of triples, iterated in insertion order.
#[derive(Debug, Clone, Default)]
pub struct RdfGraph {
    order: Vec<Triple>,
    index: HashSet<Triple>,
}

impl RdfGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.index.contains(&triple) {
            return false;
        }
        self.index.insert(triple.clone());
        self.order.push(triple);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.index.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.order.iter()
    }

    /// One triple per line, N-Triples style.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        for t in &self.order {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromIterator<Triple> for RdfGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = RdfGraph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

impl PartialEq for RdfGraph {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, RdfError> {
        let name = name.into();
        if name.is_empty() || name.starts_with('?') || name.starts_with('$') {
            return Err(RdfError::InvalidVariable(name));
        }
        Ok(Self(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermPattern {
    Var(Variable),
    Term(Term),
}

impl TermPattern {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

impl From<Variable> for TermPattern {
    fn from(v: Variable) -> Self {
        TermPattern::Var(v)
    }
}

impl From<Term> for TermPattern {
    fn from(t: Term) -> Self {
        TermPattern::Term(t)
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Var(v) => v.fmt(f),
            TermPattern::Term(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    /// Enforces the position sets: no literal subject, predicate is an IRI or variable.
    pub fn new(
        subject: impl Into<TermPattern>,
        predicate: impl Into<TermPattern>,
        object: impl Into<TermPattern>,
    ) -> Result<Self, RdfError> {
        let (subject, predicate, object) = (subject.into(), predicate.into(), object.into());
        if let TermPattern::Term(t) = &subject {
            if t.is_literal() {
                return Err(RdfError::Position("subject", t.to_string()));
            }
        }
        if let TermPattern::Term(t) = &predicate {
            if !t.is_iri() {
                return Err(RdfError::Position("predicate", t.to_string()));
            }
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// var(t), in first-occurrence order.
    pub fn variables(&self) -> Vec<Variable> {
        let mut out: Vec<Variable> = Vec::with_capacity(3);
        for p in self.positions() {
            if let TermPattern::Var(v) = p {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphPattern {
    Bgp(Vec<TriplePattern>),
    And(Box<GraphPattern>, Box<GraphPattern>),
    Opt(Box<GraphPattern>, Box<GraphPattern>),
    Union(Box<GraphPattern>, Box<GraphPattern>),
}

impl GraphPattern {
    pub fn and(l: GraphPattern, r: GraphPattern) -> Self {
        GraphPattern::And(Box::new(l), Box::new(r))
    }

    pub fn opt(l: GraphPattern, r: GraphPattern) -> Self {
        GraphPattern::Opt(Box::new(l), Box::new(r))
    }

    pub fn union(l: GraphPattern, r: GraphPattern) -> Self {
        GraphPattern::Union(Box::new(l), Box::new(r))
    }

    /// All variables mentioned anywhere, in first-occurrence order.
    pub fn variables(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<Variable>) {
        match self {
            GraphPattern::Bgp(tps) => {
                for tp in tps {
                    for v in tp.variables() {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
            GraphPattern::And(l, r) | GraphPattern::Opt(l, r) | GraphPattern::Union(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }

    pub fn triple_patterns(&self) -> Vec<&TriplePattern> {
        match self {
            GraphPattern::Bgp(tps) => tps.iter().collect(),
            GraphPattern::And(l, r) | GraphPattern::Opt(l, r) | GraphPattern::Union(l, r) => {
                let mut v = l.triple_patterns();
                v.extend(r.triple_patterns());
                v
            }
        }
    }
}

/// A partial function from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionMapping(BTreeMap<Variable, Term>);

impl SolutionMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Variable, Term)>) -> Self {
        Self(pairs.into_iter().collect())
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Variable, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn domain(&self) -> BTreeSet<&Variable> {
        self.0.keys().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    /// Two mappings are compatible when they agree on every shared variable.
    pub fn compatible(&self, other: &SolutionMapping) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .0
            .iter()
            .all(|(v, t)| large.0.get(v).is_none_or(|u| u == t))
    }

    /// The union of two compatible mappings; `None` if they conflict.
    pub fn merge(&self, other: &SolutionMapping) -> Option<SolutionMapping> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        for (v, t) in &other.0 {
            out.0.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Some(out)
    }

    /// Restriction to the given variables (unbound ones stay unbound).
    pub fn project(&self, vars: &[Variable]) -> SolutionMapping {
        SolutionMapping(
            vars.iter()
                .filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        )
    }
}

impl fmt::Display for SolutionMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}
