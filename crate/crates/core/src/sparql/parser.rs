use std::collections::BTreeMap;

use super::lexer::{tokenize, Spanned, Tok};
use super::{SparqlError, SparqlQuery};
use crate::rdf::{GraphPattern, Literal, Term, TermPattern, TriplePattern, Variable, RDF_TYPE};

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

pub(super) fn parse(text: &str) -> Result<SparqlQuery, SparqlError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        prefixes: BTreeMap::new(),
    };
    p.query()
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> SparqlError {
        let t = self.peek();
        SparqlError::syntax(
            t.line,
            t.column,
            format!("unexpected {}", t.tok.describe()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SparqlError> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[kw]))
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), SparqlError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn query(&mut self) -> Result<SparqlQuery, SparqlError> {
        while self.is_keyword("PREFIX") {
            let kw = self.advance();
            let label = match self.advance().tok {
                Tok::PName(label, local) if local.is_empty() => label,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["prefix label"]));
                }
            };
            let iri = match &self.peek().tok {
                Tok::Iri(iri) => iri.clone(),
                _ => return Err(self.unexpected(&["IRI"])),
            };
            self.advance();
            if self.prefixes.insert(label.clone(), iri).is_some() {
                return Err(SparqlError::syntax(
                    kw.line,
                    kw.column,
                    format!("duplicate prefix '{label}:'"),
                    vec![],
                ));
            }
        }
        self.expect_keyword("SELECT")?;
        let distinct = if self.is_keyword("DISTINCT") {
            self.advance();
            true
        } else {
            false
        };
        let mut projection = Vec::new();
        let mut positions = Vec::new();
        while let Tok::Var(name) = &self.peek().tok {
            let v = Variable::new(name.clone()).expect("lexer yields non-empty names");
            let at = (self.peek().line, self.peek().column);
            self.advance();
            if !projection.contains(&v) {
                projection.push(v);
                positions.push(at);
            }
        }
        if projection.is_empty() {
            return Err(self.unexpected(&["variable"]));
        }
        if self.is_keyword("WHERE") {
            self.advance();
        }
        let pattern = self.group()?;
        if !matches!(self.peek().tok, Tok::Eof) {
            return Err(self.unexpected(&["end of input"]));
        }
        let used = pattern.variables();
        for (v, (line, column)) in projection.iter().zip(positions) {
            if !used.contains(v) {
                return Err(SparqlError::UnusedProjection {
                    line,
                    column,
                    variable: v.to_string(),
                });
            }
        }
        Ok(SparqlQuery {
            prefixes: std::mem::take(&mut self.prefixes),
            distinct,
            projection,
            pattern,
        })
    }

    /// `{ ... }`
    fn group(&mut self) -> Result<GraphPattern, SparqlError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut acc: Option<GraphPattern> = None;
        let combine = |acc: Option<GraphPattern>, e: GraphPattern| match acc {
            None => e,
            Some(a) => GraphPattern::and(a, e),
        };
        loop {
            match &self.peek().tok {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::LBrace => {
                    let mut e = self.group()?;
                    while self.is_keyword("UNION") {
                        self.advance();
                        let r = self.group()?;
                        e = GraphPattern::union(e, r);
                    }
                    acc = Some(combine(acc, e));
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("OPTIONAL") => {
                    self.advance();
                    let r = self.group()?;
                    acc = Some(GraphPattern::opt(
                        acc.unwrap_or(GraphPattern::Bgp(vec![])),
                        r,
                    ));
                }
                Tok::Dot => {
                    // stray separator between group elements
                    self.advance();
                }
                _ => {
                    let triples = self.triples_block()?;
                    acc = Some(combine(acc, GraphPattern::Bgp(triples)));
                }
            }
        }
        Ok(acc.unwrap_or(GraphPattern::Bgp(vec![])))
    }

    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Iri(_) | Tok::PName(..) | Tok::Var(_) | Tok::Str(_) => true,
            Tok::Word(w) => w == "a",
            _ => false,
        }
    }

    /// Triples separated by '.', with ';' and ',' abbreviations. A missing '.'
    /// between two complete triples is tolerated.
    fn triples_block(&mut self) -> Result<Vec<TriplePattern>, SparqlError> {
        let mut out = Vec::new();
        loop {
            let subject = self.term_or_var()?;
            loop {
                let pred_at = (self.peek().line, self.peek().column);
                let predicate = self.verb()?;
                loop {
                    let object = self.term_or_var()?;
                    let tp = TriplePattern::new(subject.clone(), predicate.clone(), object)
                        .map_err(|e| {
                            SparqlError::syntax(pred_at.0, pred_at.1, e.to_string(), vec![])
                        })?;
                    out.push(tp);
                    if matches!(self.peek().tok, Tok::Comma) {
                        self.advance();
                        continue;
                    }
                    break;
                }
                if matches!(self.peek().tok, Tok::Semi) {
                    while matches!(self.peek().tok, Tok::Semi) {
                        self.advance();
                    }
                    if matches!(self.peek().tok, Tok::Dot | Tok::RBrace) {
                        break;
                    }
                    continue;
                }
                break;
            }
            match &self.peek().tok {
                Tok::Dot => {
                    self.advance();
                    if !self.starts_term() {
                        return Ok(out);
                    }
                }
                Tok::RBrace | Tok::LBrace => return Ok(out),
                _ if self.is_keyword("OPTIONAL") => return Ok(out),
                _ if self.starts_term() && !self.is_keyword("a") => {}
                _ => return Err(self.unexpected(&["'.'", "';'", "','", "'}'"])),
            }
        }
    }

    fn verb(&mut self) -> Result<TermPattern, SparqlError> {
        if self.is_keyword("a") {
            self.advance();
            return Ok(TermPattern::Term(Term::Iri(RDF_TYPE.to_string())));
        }
        match &self.peek().tok {
            Tok::Iri(_) | Tok::PName(..) | Tok::Var(_) => self.term_or_var(),
            _ => Err(self.unexpected(&["predicate"])),
        }
    }

    fn iri(&mut self) -> Result<String, SparqlError> {
        let t = self.advance();
        let iri = match t.tok {
            Tok::Iri(iri) => iri,
            Tok::PName(prefix, local) => match self.prefixes.get(&prefix) {
                Some(base) => format!("{base}{local}"),
                None => {
                    return Err(SparqlError::UnknownPrefix {
                        line: t.line,
                        column: t.column,
                        prefix,
                    })
                }
            },
            _ => {
                self.pos -= 1;
                return Err(self.unexpected(&["IRI"]));
            }
        };
        crate::rdf::Term::iri(iri.clone())
            .map_err(|e| SparqlError::syntax(t.line, t.column, e.to_string(), vec![]))?;
        Ok(iri)
    }

    fn term_or_var(&mut self) -> Result<TermPattern, SparqlError> {
        match self.peek().tok.clone() {
            Tok::Var(name) => {
                self.advance();
                Ok(TermPattern::Var(
                    Variable::new(name).expect("lexer yields non-empty names"),
                ))
            }
            Tok::Iri(_) | Tok::PName(..) => Ok(TermPattern::Term(Term::Iri(self.iri()?))),
            Tok::Str(s) => {
                let at = self.advance();
                let lit = match &self.peek().tok {
                    Tok::Caret2 => {
                        self.advance();
                        let dt = self.iri()?;
                        Literal::typed(s, dt)
                    }
                    Tok::LangTag(tag) => {
                        let tag = tag.clone();
                        self.advance();
                        Literal::lang(s, tag)
                    }
                    _ => Ok(Literal::plain(s)),
                }
                .map_err(|e| SparqlError::syntax(at.line, at.column, e.to_string(), vec![]))?;
                Ok(TermPattern::Term(Term::Literal(lit)))
            }
            _ => Err(self.unexpected(&["variable", "IRI", "prefixed name", "literal"])),
        }
    }
}
