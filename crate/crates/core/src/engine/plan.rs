use crate::mapping::{decode_hole, encode_hole, ObdaSpec, Segment, TermTemplate};
use crate::rdf::{GraphPattern, Term, TermPattern, TriplePattern, Variable};
use crate::sparql::SparqlQuery;

/// A required cell value, `column = value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnFilter {
    pub column: String,
    pub value: String,
}

/// One feasible choice for a triple pattern: a target template of an axiom
/// plus the column filters derived from the pattern's constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub axiom: usize,
    pub target: usize,
    pub filters: Vec<ColumnFilter>,
}

/// A conjunctive branch: `atoms[i]` answers `patterns[i]` of its BGP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgpPlan {
    pub patterns: Vec<TriplePattern>,
    /// Union of conjunctive branches. Empty when some pattern matches no target.
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    Bgp(BgpPlan),
    Join(Box<PlanNode>, Box<PlanNode>),
    LeftJoin(Box<PlanNode>, Box<PlanNode>),
    Union(Box<PlanNode>, Box<PlanNode>),
}

impl PlanNode {
    pub fn bgps(&self) -> Vec<&BgpPlan> {
        match self {
            PlanNode::Bgp(b) => vec![b],
            PlanNode::Join(l, r) | PlanNode::LeftJoin(l, r) | PlanNode::Union(l, r) => {
                let mut v = l.bgps();
                v.extend(r.bgps());
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub projection: Vec<Variable>,
    pub distinct: bool,
    pub root: PlanNode,
    pub warnings: Vec<String>,
}

impl QueryPlan {
    pub fn branch_count(&self) -> usize {
        self.root.bgps().iter().map(|b| b.branches.len()).sum()
    }

    /// Indices of the axioms whose sources the plan reads, ascending.
    pub fn axioms(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .root
            .bgps()
            .iter()
            .flat_map(|b| b.branches.iter())
            .flat_map(|br| br.atoms.iter().map(|a| a.axiom))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Upper bound on conjunctive branches generated for one BGP.
const MAX_BRANCHES: usize = 100_000;

pub fn unfold(query: &SparqlQuery, spec: &ObdaSpec) -> QueryPlan {
    let mut warnings = Vec::new();
    let root = unfold_pattern(&query.pattern, spec, &mut warnings);
    QueryPlan {
        projection: query.projection.clone(),
        distinct: query.distinct,
        root,
        warnings,
    }
}

fn unfold_pattern(p: &GraphPattern, spec: &ObdaSpec, warnings: &mut Vec<String>) -> PlanNode {
    let node = |l: &GraphPattern, r: &GraphPattern, w: &mut Vec<String>| {
        (
            Box::new(unfold_pattern(l, spec, w)),
            Box::new(unfold_pattern(r, spec, w)),
        )
    };
    match p {
        GraphPattern::Bgp(tps) => PlanNode::Bgp(unfold_bgp(tps, spec, warnings)),
        GraphPattern::And(l, r) => {
            let (l, r) = node(l, r, warnings);
            PlanNode::Join(l, r)
        }
        GraphPattern::Opt(l, r) => {
            let (l, r) = node(l, r, warnings);
            PlanNode::LeftJoin(l, r)
        }
        GraphPattern::Union(l, r) => {
            let (l, r) = node(l, r, warnings);
            PlanNode::Union(l, r)
        }
    }
}

fn unfold_bgp(tps: &[TriplePattern], spec: &ObdaSpec, warnings: &mut Vec<String>) -> BgpPlan {
    let mut choices = Vec::with_capacity(tps.len());
    for tp in tps {
        let matches = pattern_matches(tp, spec);
        if matches.is_empty() {
            warnings.push(format!("triple pattern {tp} matches no mapping target"));
            return BgpPlan {
                patterns: tps.to_vec(),
                branches: vec![],
            };
        }
        choices.push(matches);
    }
    let total = choices
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if total > MAX_BRANCHES {
        warnings.push(format!(
            "basic graph pattern unfolds into {total} branches; only the first {MAX_BRANCHES} are kept"
        ));
    }
    let mut branches = vec![Branch { atoms: vec![] }];
    for c in &choices {
        let mut next = Vec::with_capacity(branches.len() * c.len());
        'outer: for b in &branches {
            for atom in c {
                if next.len() >= MAX_BRANCHES {
                    break 'outer;
                }
                let mut atoms = b.atoms.clone();
                atoms.push(atom.clone());
                next.push(Branch { atoms });
            }
        }
        branches = next;
    }
    BgpPlan {
        patterns: tps.to_vec(),
        branches,
    }
}

/// Every target template of every axiom that can produce a triple matching `tp`.
pub fn pattern_matches(tp: &TriplePattern, spec: &ObdaSpec) -> Vec<Atom> {
    let mut out = Vec::new();
    for (ai, axiom) in spec.mappings().axioms.iter().enumerate() {
        'targets: for (ti, target) in axiom.targets.iter().enumerate() {
            let mut filters = Vec::new();
            for (pat, tpl) in tp.positions().into_iter().zip(target.positions()) {
                match position_filters(pat, tpl) {
                    Some(fs) => {
                        for f in fs {
                            // two constants pinning one column to different values
                            if filters
                                .iter()
                                .any(|g: &ColumnFilter| g.column == f.column && g.value != f.value)
                            {
                                continue 'targets;
                            }
                            if !filters.contains(&f) {
                                filters.push(f);
                            }
                        }
                    }
                    None => continue 'targets,
                }
            }
            out.push(Atom {
                axiom: ai,
                target: ti,
                filters,
            });
        }
    }
    out
}

/// `None` when the template can never produce the pattern's constant;
/// otherwise the column filters it implies. Rows passing the filters are still
/// checked term by term during execution.
fn position_filters(pat: &TermPattern, tpl: &TermTemplate) -> Option<Vec<ColumnFilter>> {
    let c = match pat {
        TermPattern::Var(_) => return Some(vec![]),
        TermPattern::Term(c) => c,
    };
    match tpl {
        TermTemplate::Constant(t) => (t == c).then(Vec::new),
        TermTemplate::Iri(template) => {
            let Term::Iri(iri) = c else { return None };
            if let Some((prefix, hole)) = template.suffix_hole() {
                let rest = iri.strip_prefix(prefix)?;
                let value = decode_hole(rest)?;
                if encode_hole(&value) != rest {
                    return None;
                }
                return Some(vec![ColumnFilter {
                    column: hole.to_string(),
                    value,
                }]);
            }
            if template.is_constant() {
                return (template.constant_prefix() == iri).then(Vec::new);
            }
            iri.starts_with(template.constant_prefix()).then(Vec::new)
        }
        TermTemplate::Literal {
            template,
            datatype,
            language,
        } => {
            let Term::Literal(lit) = c else { return None };
            if lit.datatype() != datatype.as_deref() || lit.language() != language.as_deref() {
                return None;
            }
            match template.segments() {
                [Segment::Hole(h)] => Some(vec![ColumnFilter {
                    column: h.clone(),
                    value: lit.lexical().to_string(),
                }]),
                _ if template.is_constant() => {
                    (template.constant_prefix() == lit.lexical()).then(Vec::new)
                }
                _ => lit
                    .lexical()
                    .starts_with(template.constant_prefix())
                    .then(Vec::new),
            }
        }
    }
}
