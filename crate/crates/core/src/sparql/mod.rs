//! Parser for the SELECT subset of SPARQL used by the engine: PREFIX
//! declarations, `SELECT [DISTINCT]` with a variable list, and a WHERE group
//! made of triple patterns, nested groups, `OPTIONAL` and `UNION`.

mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rdf::{
    evaluate_pattern, GraphPattern, RdfGraph, SolutionMapping, Term, TermPattern, TriplePattern,
    Variable,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparqlQuery {
    pub prefixes: BTreeMap<String, String>,
    pub distinct: bool,
    pub projection: Vec<Variable>,
    pub pattern: GraphPattern,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SparqlError {
    #[error("{line}:{column}: syntax error: {message}{}", expected_suffix(.expected))]
    Syntax {
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("{line}:{column}: unknown prefix '{prefix}:'")]
    UnknownPrefix {
        line: usize,
        column: usize,
        prefix: String,
    },
    #[error("{line}:{column}: projected variable {variable} does not occur in WHERE")]
    UnusedProjection {
        line: usize,
        column: usize,
        variable: String,
    },
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl SparqlError {
    pub(crate) fn syntax(
        line: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    ) -> Self {
        SparqlError::Syntax {
            line,
            column,
            message,
            expected,
        }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            SparqlError::Syntax { line, column, .. }
            | SparqlError::UnknownPrefix { line, column, .. }
            | SparqlError::UnusedProjection { line, column, .. } => (*line, *column),
        }
    }

    /// `file:line:col: message`, the form used for diagnostics on stderr.
    pub fn diagnostic(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl SparqlQuery {
    /// Reference answer over a materialized graph: pattern evaluation,
    /// projection, then DISTINCT.
    pub fn evaluate(&self, graph: &RdfGraph) -> Vec<SolutionMapping> {
        let projected = evaluate_pattern(&self.pattern, graph)
            .into_iter()
            .map(|mu| mu.project(&self.projection));
        if self.distinct {
            let mut seen = std::collections::HashSet::new();
            projected.filter(|mu| seen.insert(mu.clone())).collect()
        } else {
            projected.collect()
        }
    }
}

pub fn parse_sparql(text: &str) -> Result<SparqlQuery, SparqlError> {
    parser::parse(text)
}

impl std::str::FromStr for SparqlQuery {
    type Err = SparqlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sparql(s)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, tp: &TermPattern) -> fmt::Result {
    match tp {
        TermPattern::Var(v) => write!(f, "{v}"),
        TermPattern::Term(Term::Literal(l)) => {
            write!(f, "\"")?;
            for c in l.lexical().chars() {
                match c {
                    '"' => f.write_str("\\\"")?,
                    '\\' => f.write_str("\\\\")?,
                    '\n' => f.write_str("\\n")?,
                    '\r' => f.write_str("\\r")?,
                    '\t' => f.write_str("\\t")?,
                    c => write!(f, "{c}")?,
                }
            }
            write!(f, "\"")?;
            if let Some(dt) = l.datatype() {
                write!(f, "^^<{dt}>")?;
            } else if let Some(tag) = l.language() {
                write!(f, "@{tag}")?;
            }
            Ok(())
        }
        TermPattern::Term(t) => write!(f, "{t}"),
    }
}

fn write_triples(f: &mut fmt::Formatter<'_>, tps: &[TriplePattern], indent: usize) -> fmt::Result {
    for tp in tps {
        write!(f, "{:indent$}", "")?;
        write_term(f, &tp.subject)?;
        f.write_str(" ")?;
        write_term(f, &tp.predicate)?;
        f.write_str(" ")?;
        write_term(f, &tp.object)?;
        f.write_str(" .\n")?;
    }
    Ok(())
}

/// Writes the elements of a group so that re-parsing yields `p` again.
fn write_group_content(f: &mut fmt::Formatter<'_>, p: &GraphPattern, indent: usize) -> fmt::Result {
    match p {
        GraphPattern::Bgp(tps) => write_triples(f, tps, indent),
        GraphPattern::And(l, r) => {
            write_group_content(f, l, indent)?;
            write_braced(f, r, indent)
        }
        GraphPattern::Opt(l, r) => {
            write_group_content(f, l, indent)?;
            writeln!(f, "{:indent$}OPTIONAL", "")?;
            write_braced(f, r, indent)
        }
        GraphPattern::Union(l, r) => {
            write_braced(f, l, indent)?;
            writeln!(f, "{:indent$}UNION", "")?;
            write_braced(f, r, indent)
        }
    }
}

fn write_braced(f: &mut fmt::Formatter<'_>, p: &GraphPattern, indent: usize) -> fmt::Result {
    writeln!(f, "{:indent$}{{", "")?;
    write_group_content(f, p, indent + 2)?;
    writeln!(f, "{:indent$}}}", "")
}

/// Pretty-prints with full IRIs; the output re-parses to an equal query.
impl fmt::Display for SparqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, iri) in &self.prefixes {
            writeln!(f, "PREFIX {label}: <{iri}>")?;
        }
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        for v in &self.projection {
            write!(f, "{v} ")?;
        }
        f.write_str("\nWHERE {\n")?;
        write_group_content(f, &self.pattern, 2)?;
        f.write_str("}\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Literal, XSD};

    const POLLS_LOW: &str = "PREFIX : <http://example.org/polls#>
select distinct ?s1 ?d ?l
where {
?s1 :date ?d .
?s1 :lead ?l .}";

    const POLLS_HIGH: &str = "PREFIX : <http://example.org/polls#>
select distinct ?s1 ?d
where {
?s1 :date ?d
?s1 :lead \"1.5\"^^<http://www.w3.org/2001/XMLSchema#float> . }";

    fn v(n: &str) -> Variable {
        Variable::new(n).unwrap()
    }

    #[test]
    fn low_selectivity_query() {
        let q = parse_sparql(POLLS_LOW).unwrap();
        assert!(q.distinct);
        assert_eq!(q.projection, vec![v("s1"), v("d"), v("l")]);
        match &q.pattern {
            GraphPattern::Bgp(tps) => assert_eq!(tps.len(), 2),
            other => panic!("expected BGP, got {other:?}"),
        }
    }

    #[test]
    fn high_selectivity_query_with_missing_separator() {
        let q = parse_sparql(POLLS_HIGH).unwrap();
        let GraphPattern::Bgp(tps) = &q.pattern else {
            panic!("expected BGP")
        };
        assert_eq!(tps.len(), 2);
        assert_eq!(
            tps[1].object,
            TermPattern::Term(Term::Literal(
                Literal::typed("1.5", format!("{XSD}float")).unwrap()
            ))
        );
    }

    #[test]
    fn same_variable_everywhere() {
        let q = parse_sparql("SELECT ?x WHERE { ?x ?x ?x }").unwrap();
        let GraphPattern::Bgp(tps) = &q.pattern else {
            panic!()
        };
        assert_eq!(tps.len(), 1);
        assert!(tps[0]
            .positions()
            .iter()
            .all(|p| p.as_var() == Some(&v("x"))));
    }

    #[test]
    fn semicolon_shares_subject_and_plain_literal() {
        let q = parse_sparql(
            "PREFIX twitter: <http://twitter.com/>
             select distinct ?s where { ?s twitter:tweetsAbout <https://diku-dk.github.io/edbticdt2020> ;
             twitter:sentiment \"positive\" }",
        )
        .unwrap();
        let GraphPattern::Bgp(tps) = &q.pattern else {
            panic!()
        };
        assert_eq!(tps.len(), 2);
        assert_eq!(tps[0].subject, tps[1].subject);
        assert_eq!(tps[1].object, TermPattern::Term(Term::literal("positive")));
    }

    #[test]
    fn optional_and_union_nodes() {
        let q = parse_sparql(
            "PREFIX e: <http://e/> SELECT ?a ?b WHERE { ?a e:p ?b OPTIONAL { ?b e:q ?a } }",
        )
        .unwrap();
        assert!(matches!(q.pattern, GraphPattern::Opt(..)));
        let q = parse_sparql(
            "PREFIX e: <http://e/> SELECT ?a WHERE { { ?a e:p e:x } UNION { ?a e:q e:y } }",
        )
        .unwrap();
        assert!(matches!(q.pattern, GraphPattern::Union(..)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_sparql("SELECT") {
            Err(SparqlError::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_sparql("SELECT ?x WHERE { ?x foo:bar ?y }"),
            Err(SparqlError::UnknownPrefix { .. })
        ));
        assert!(matches!(
            parse_sparql("SELECT ?z WHERE { ?x <http://e/p> ?y }"),
            Err(SparqlError::UnusedProjection { .. })
        ));
        assert!(parse_sparql(
            "PREFIX a: <http://a/> PREFIX a: <http://b/> SELECT ?x WHERE { ?x ?x ?x }"
        )
        .is_err());
        let err = parse_sparql("SELECT ?x WHERE {\n ?x <http://e/p> ?y ORDER }").unwrap_err();
        assert_eq!(err.position().0, 2);
        assert!(err.diagnostic("q.rq").starts_with("q.rq:2:"));
    }

    #[test]
    fn comments_are_ignored() {
        let q = parse_sparql("# leading\nSELECT ?x # trailing\nWHERE { ?x <http://e/p> \"a#b\" }")
            .unwrap();
        let GraphPattern::Bgp(tps) = &q.pattern else {
            panic!()
        };
        assert_eq!(tps[0].object, TermPattern::Term(Term::literal("a#b")));
    }

    #[test]
    fn display_round_trips() {
        for text in [POLLS_LOW, POLLS_HIGH] {
            let q = parse_sparql(text).unwrap();
            let printed = q.to_string();
            assert_eq!(parse_sparql(&printed).unwrap(), q, "{printed}");
        }
    }
}
