//! SQL-like rendering of a plan, for `--dump-plan` and debugging.

use std::collections::HashMap;

use super::plan::{Atom, BgpPlan, Branch, PlanNode, QueryPlan};
use crate::mapping::{ObdaSpec, Segment, TermTemplate};
use crate::rdf::{TermPattern, Variable};

pub fn render_plan(plan: &QueryPlan, spec: &ObdaSpec) -> String {
    let mut counter = 0;
    let vars: Vec<String> = plan
        .projection
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    let mut out = format!(
        "SELECT {}{}\nFROM (\n{}\n) Q",
        if plan.distinct { "DISTINCT " } else { "" },
        if vars.is_empty() {
            "*".to_string()
        } else {
            vars.join(", ")
        },
        indent(&node(&plan.root, spec, &mut counter))
    );
    for w in &plan.warnings {
        out.push_str(&format!("\n-- warning: {w}"));
    }
    out
}

fn indent(text: &str) -> String {
    text.lines()
        .map(|l| format!("  {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn node(n: &PlanNode, spec: &ObdaSpec, counter: &mut usize) -> String {
    let pair = |l: &PlanNode, r: &PlanNode, op: &str, counter: &mut usize| {
        let l = node(l, spec, counter);
        let r = node(r, spec, counter);
        format!(
            "SELECT * FROM (\n{}\n) {op} (\n{}\n)",
            indent(&l),
            indent(&r)
        )
    };
    match n {
        PlanNode::Bgp(b) => bgp(b, spec, counter),
        PlanNode::Join(l, r) => pair(l, r, "NATURAL JOIN", counter),
        PlanNode::LeftJoin(l, r) => pair(l, r, "NATURAL LEFT JOIN", counter),
        PlanNode::Union(l, r) => {
            let l = node(l, spec, counter);
            let r = node(r, spec, counter);
            format!("{l}\nUNION ALL\n{r}")
        }
    }
}

fn bgp(b: &BgpPlan, spec: &ObdaSpec, counter: &mut usize) -> String {
    if b.patterns.is_empty() {
        return "SELECT 1".into();
    }
    if b.branches.is_empty() {
        return "SELECT NULL WHERE 1 = 0 -- no mapping target matches".into();
    }
    b.branches
        .iter()
        .map(|br| branch(b, br, spec, counter))
        .collect::<Vec<_>>()
        .join("\nUNION ALL\n")
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn expr(t: &TermTemplate, view: &str) -> String {
    match t {
        TermTemplate::Constant(term) => quote(term.value()),
        TermTemplate::Iri(tpl) => tpl
            .segments()
            .iter()
            .map(|s| match s {
                Segment::Text(x) => quote(x),
                Segment::Hole(h) => format!("ENCODE({view}.{h})"),
            })
            .collect::<Vec<_>>()
            .join(" || "),
        TermTemplate::Literal { template, .. } => template
            .segments()
            .iter()
            .map(|s| match s {
                Segment::Text(x) => quote(x),
                Segment::Hole(h) => format!("{view}.{h}"),
            })
            .collect::<Vec<_>>()
            .join(" || "),
    }
}

/// Templates equal up to hole names; the join can then compare columns.
fn single_hole_shape(t: &TermTemplate) -> Option<(String, &str)> {
    match t {
        TermTemplate::Iri(tpl) => tpl.suffix_hole().map(|(p, h)| (format!("iri:{p}"), h)),
        TermTemplate::Literal {
            template,
            datatype,
            language,
        } => match template.segments() {
            [Segment::Hole(h)] => Some((format!("lit:{datatype:?}:{language:?}"), h.as_str())),
            _ => None,
        },
        TermTemplate::Constant(_) => None,
    }
}

fn branch(b: &BgpPlan, br: &Branch, spec: &ObdaSpec, counter: &mut usize) -> String {
    let mut from = Vec::new();
    let mut select: Vec<String> = Vec::new();
    let mut conds: Vec<String> = Vec::new();
    let mut first: HashMap<&Variable, (String, &TermTemplate)> = HashMap::new();
    let mut order: Vec<&Variable> = Vec::new();
    for (tp, atom) in b.patterns.iter().zip(&br.atoms) {
        *counter += 1;
        let view = format!("QVIEW{counter}");
        let Atom {
            axiom,
            target,
            filters,
        } = atom;
        from.push(format!("({}) {view}", spec.source(*axiom)));
        let tt = &spec.mappings().axioms[*axiom].targets[*target];
        for f in filters {
            conds.push(format!("{view}.{} = {}", f.column, quote(&f.value)));
        }
        for (pat, tpl) in tp.positions().into_iter().zip(tt.positions()) {
            match pat {
                TermPattern::Var(v) => match first.get(v) {
                    None => {
                        first.insert(v, (view.clone(), tpl));
                        order.push(v);
                    }
                    Some((other, otpl)) => {
                        let cond = match (single_hole_shape(otpl), single_hole_shape(tpl)) {
                            (Some((s1, h1)), Some((s2, h2))) if s1 == s2 => {
                                format!("{other}.{h1} = {view}.{h2}")
                            }
                            _ => format!("{} = {}", expr(otpl, other), expr(tpl, &view)),
                        };
                        if !conds.contains(&cond) {
                            conds.push(cond);
                        }
                    }
                },
                TermPattern::Term(c) => {
                    let pinned = matches!(tpl, TermTemplate::Constant(_))
                        || single_hole_shape(tpl).is_some();
                    if !pinned {
                        conds.push(format!("{} = {}", expr(tpl, &view), quote(c.value())));
                    }
                }
            }
        }
    }
    for v in order {
        let (view, tpl) = &first[v];
        select.push(format!("{} AS {}", expr(tpl, view), v.name()));
    }
    let mut out = format!(
        "SELECT {}\nFROM {}",
        if select.is_empty() {
            "1".to_string()
        } else {
            select.join(",\n       ")
        },
        from.join(",\n     ")
    );
    if !conds.is_empty() {
        out.push_str(&format!("\nWHERE {}", conds.join("\n  AND ")));
    }
    out
}
