//! The native mapping syntax:
//!
//! ```text
//! [PrefixDeclaration]
//! four: http://foursquare.com/
//!
//! [MappingDeclaration] @collection [[
//! mappingId foursquare_mapping
//! target    four:{id} four:name {name} ; four:hereNow {h}^^xsd:integer .
//! source    select id, name, hereNow_count as h from (foursqr key:coffee near:Chicago)
//! ]]
//! ```

use std::collections::{BTreeMap, HashSet};

use super::template::{Template, TermTemplate};
use super::{MappingAxiom, MappingCollection, MappingError, TargetTemplate};
use crate::rdf::{Literal, Term, OWL, RDF, RDFS, RDF_TYPE, XSD};

pub(super) fn parse(text: &str) -> Result<MappingCollection, MappingError> {
    let mut prefixes: BTreeMap<String, String> =
        [("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD), ("owl", OWL)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
    let mut axioms = Vec::new();
    let mut seen = HashSet::new();

    let mut rest = text;
    let mut offset = 0usize;
    let line_of = |off: usize| text[..off.min(text.len())].matches('\n').count() + 1;
    loop {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        rest = trimmed;
        if rest.is_empty() {
            break;
        }
        if let Some(r) = rest.strip_prefix('#') {
            let end = r.find('\n').map_or(r.len(), |i| i + 1);
            offset += 1 + end;
            rest = &r[end..];
        } else if let Some(r) = rest.strip_prefix("[PrefixDeclaration]") {
            offset += "[PrefixDeclaration]".len();
            // prefix lines run until the next section header
            let end = r.find("\n[").map_or(r.len(), |i| i + 1);
            for (i, line) in r[..end].lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (label, iri) = line.split_once(':').ok_or_else(|| MappingError::Syntax {
                    mapping_id: None,
                    line: line_of(offset) + i,
                    message: format!("expected 'label: IRI', found {line:?}"),
                })?;
                let label = label.trim();
                let iri = iri
                    .trim()
                    .trim_start_matches('<')
                    .trim_end_matches('>')
                    .trim();
                if !label
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
                    || Term::iri(iri).is_err()
                {
                    return Err(MappingError::Syntax {
                        mapping_id: None,
                        line: line_of(offset) + i,
                        message: format!("invalid prefix declaration {line:?}"),
                    });
                }
                prefixes.insert(label.to_string(), iri.to_string());
            }
            offset += end;
            rest = &r[end..];
        } else if let Some(r) = rest.strip_prefix("[MappingDeclaration]") {
            offset += "[MappingDeclaration]".len();
            let r2 = r.trim_start();
            let r2 = r2.strip_prefix("@collection").unwrap_or(r2).trim_start();
            let Some(body_start) = r2.strip_prefix("[[") else {
                return Err(MappingError::Syntax {
                    mapping_id: None,
                    line: line_of(offset),
                    message: "expected '[[' after [MappingDeclaration]".into(),
                });
            };
            offset += r.len() - body_start.len();
            let close = find_collection_end(body_start).ok_or_else(|| MappingError::Syntax {
                mapping_id: None,
                line: line_of(offset),
                message: "unterminated mapping collection (missing ']]')".into(),
            })?;
            let body = &body_start[..close];
            for axiom in parse_body(body, line_of(offset), &prefixes)? {
                if !seen.insert(axiom.id.clone()) {
                    return Err(MappingError::DuplicateId(axiom.id));
                }
                axioms.push(axiom);
            }
            offset += close + 2;
            rest = &body_start[close + 2..];
        } else {
            let word: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
            return Err(MappingError::Syntax {
                mapping_id: None,
                line: line_of(offset),
                message: format!("unexpected {word:?}, expected a section header"),
            });
        }
    }
    Ok(MappingCollection { prefixes, axioms })
}

/// Byte index of the closing `]]`, ignoring brackets inside quotes.
fn find_collection_end(body: &str) -> Option<usize> {
    let bytes = body.as_bytes();
    let mut quote: Option<u8> = None;
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'\'' || b == b'"' => quote = Some(b),
            None if b == b']' && bytes.get(i + 1) == Some(&b']') => return Some(i),
            None => {}
        }
        i += 1;
    }
    None
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Id,
    Target,
    Source,
}

/// Splits a collection body into fields. A field keyword counts only at the
/// start of the body or of a line.
fn split_fields(body: &str, first_line: usize) -> Vec<(Field, &str, usize)> {
    let mut marks = Vec::new();
    let mut line_start = 0usize;
    let mut line_no = first_line;
    for line in body.split_inclusive('\n') {
        let indent = line.len() - line.trim_start().len();
        let content = &line[indent..];
        for (kw, field) in [
            ("mappingId", Field::Id),
            ("target", Field::Target),
            ("source", Field::Source),
        ] {
            if let Some(after) = content.strip_prefix(kw) {
                if after.is_empty() || after.starts_with(char::is_whitespace) {
                    marks.push((field, line_start + indent, kw.len(), line_no));
                }
            }
        }
        line_start += line.len();
        line_no += 1;
    }
    let mut out = Vec::new();
    for (i, &(field, start, kw_len, line)) in marks.iter().enumerate() {
        let end = marks.get(i + 1).map_or(body.len(), |m| m.1);
        out.push((field, body[start + kw_len..end].trim(), line));
    }
    out
}

fn parse_body(
    body: &str,
    first_line: usize,
    prefixes: &BTreeMap<String, String>,
) -> Result<Vec<MappingAxiom>, MappingError> {
    let head = body.trim_start();
    if !head.is_empty() && !head.starts_with("mappingId") {
        return Err(MappingError::Syntax {
            mapping_id: None,
            line: first_line,
            message: "expected 'mappingId'".into(),
        });
    }
    let mut axioms: Vec<(String, Option<String>, Option<String>, usize)> = Vec::new();
    for (field, value, line) in split_fields(body, first_line) {
        match field {
            Field::Id => {
                let id = value.to_string();
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return Err(MappingError::Syntax {
                        mapping_id: None,
                        line,
                        message: format!("invalid mappingId {id:?}"),
                    });
                }
                axioms.push((id, None, None, line));
            }
            Field::Target | Field::Source => {
                let Some(current) = axioms.last_mut() else {
                    return Err(MappingError::Syntax {
                        mapping_id: None,
                        line,
                        message: "field before 'mappingId'".into(),
                    });
                };
                let slot = if field == Field::Target {
                    &mut current.1
                } else {
                    &mut current.2
                };
                if slot.is_some() {
                    return Err(MappingError::Syntax {
                        mapping_id: Some(current.0.clone()),
                        line,
                        message: "repeated field".into(),
                    });
                }
                *slot = Some(value.to_string());
            }
        }
    }
    axioms
        .into_iter()
        .map(|(id, target, source, line)| {
            let err = |message: String| MappingError::Syntax {
                mapping_id: Some(id.clone()),
                line,
                message,
            };
            let target = target.ok_or_else(|| err("missing 'target'".into()))?;
            let source = source.ok_or_else(|| err("missing 'source'".into()))?;
            if source.is_empty() {
                return Err(err("empty 'source'".into()));
            }
            let targets = parse_target(&target, prefixes).map_err(err)?;
            Ok(MappingAxiom {
                id,
                source_sql: source,
                targets,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum TTok {
    Term(TermTemplate),
    Semi,
    Comma,
    Dot,
}

fn expand_prefixed(word: &str, prefixes: &BTreeMap<String, String>) -> Result<String, String> {
    let (label, local) = word
        .split_once(':')
        .ok_or_else(|| format!("expected a prefixed name, found {word:?}"))?;
    let base = prefixes
        .get(label)
        .ok_or_else(|| format!("unknown prefix '{label}:'"))?;
    Ok(format!("{base}{local}"))
}

fn iri_term(text: &str) -> Result<TermTemplate, String> {
    let t = Template::parse(text)?;
    if t.is_constant() {
        Ok(TermTemplate::Constant(
            Term::iri(text.replace("\\{", "{").replace("\\}", "}")).map_err(|e| e.to_string())?,
        ))
    } else {
        Ok(TermTemplate::Iri(t))
    }
}

/// Reads an optional `^^datatype` or `@lang` suffix.
fn literal_suffix(
    chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>,
    src: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<(Option<String>, Option<String>), String> {
    match chars.peek().map(|&(_, c)| c) {
        Some('^') => {
            chars.next();
            if chars.next().map(|(_, c)| c) != Some('^') {
                return Err("expected '^^'".into());
            }
            let dt = if chars.peek().map(|&(_, c)| c) == Some('<') {
                chars.next();
                let mut s = String::new();
                for (_, c) in chars.by_ref() {
                    if c == '>' {
                        break;
                    }
                    s.push(c);
                }
                s
            } else {
                let word = take_word(chars, src);
                expand_prefixed(&word, prefixes)?
            };
            Term::iri(dt.clone()).map_err(|e| e.to_string())?;
            Ok((Some(dt), None))
        }
        Some('@') => {
            chars.next();
            let mut tag = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    tag.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            Literal::lang("", tag.clone()).map_err(|e| e.to_string())?;
            Ok((None, Some(tag)))
        }
        _ => Ok((None, None)),
    }
}

/// A bare word: runs until whitespace or ';' ',' (braces may contain anything).
/// A '.' followed by whitespace or the end terminates the word.
fn take_word(chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>, src: &str) -> String {
    let mut word = String::new();
    let mut depth = 0;
    while let Some(&(i, c)) = chars.peek() {
        if depth == 0 && (c.is_whitespace() || c == ';' || c == ',') {
            break;
        }
        if depth == 0 && c == '.' {
            let next = src[i + 1..].chars().next();
            if next.is_none_or(|n| n.is_whitespace() || n == ';' || n == ',') {
                break;
            }
        }
        if c == '{' {
            depth += 1;
        } else if c == '}' && depth > 0 {
            depth -= 1;
        }
        word.push(c);
        chars.next();
    }
    word
}

fn tokenize_target(src: &str, prefixes: &BTreeMap<String, String>) -> Result<Vec<TTok>, String> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(_, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                chars.next();
                out.push(TTok::Semi);
            }
            ',' => {
                chars.next();
                out.push(TTok::Comma);
            }
            '.' => {
                chars.next();
                out.push(TTok::Dot);
            }
            '<' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '>')) => break,
                        Some((_, c)) => s.push(c),
                        None => return Err("unterminated '<'".into()),
                    }
                }
                out.push(TTok::Term(iri_term(&s)?));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, 'n')) => s.push('\n'),
                            Some((_, 't')) => s.push('\t'),
                            Some((_, '"')) => s.push('"'),
                            Some((_, c @ ('{' | '}' | '\\'))) => {
                                s.push('\\');
                                s.push(c);
                            }
                            Some((_, c)) => s.push(c),
                            None => return Err("unterminated string".into()),
                        },
                        Some((_, c)) => s.push(c),
                        None => return Err("unterminated string".into()),
                    }
                }
                let (datatype, language) = literal_suffix(&mut chars, src, prefixes)?;
                let template = Template::parse(&s)?;
                let t = if template.is_constant() {
                    let lexical = s
                        .replace("\\{", "{")
                        .replace("\\}", "}")
                        .replace("\\\\", "\\");
                    let lit = match (&datatype, &language) {
                        (Some(dt), _) => Literal::typed(lexical, dt.clone()),
                        (None, Some(tag)) => Literal::lang(lexical, tag.clone()),
                        (None, None) => Ok(Literal::plain(lexical)),
                    }
                    .map_err(|e| e.to_string())?;
                    TermTemplate::Constant(Term::Literal(lit))
                } else {
                    TermTemplate::Literal {
                        template,
                        datatype,
                        language,
                    }
                };
                out.push(TTok::Term(t));
            }
            '{' => {
                let mut s = String::new();
                for (_, c) in chars.by_ref() {
                    s.push(c);
                    if c == '}' {
                        break;
                    }
                }
                let template = Template::parse(&s)?;
                let (datatype, language) = literal_suffix(&mut chars, src, prefixes)?;
                out.push(TTok::Term(TermTemplate::Literal {
                    template,
                    datatype,
                    language,
                }));
            }
            _ => {
                let mut word = take_word(&mut chars, src);
                let mut dots = 0;
                while word.ends_with('.') && !word.ends_with("\\.") {
                    word.pop();
                    dots += 1;
                }
                if word == "a" {
                    out.push(TTok::Term(TermTemplate::Constant(Term::Iri(
                        RDF_TYPE.into(),
                    ))));
                } else {
                    let expanded = expand_prefixed(&word, prefixes)?;
                    out.push(TTok::Term(iri_term(&expanded)?));
                }
                for _ in 0..dots {
                    out.push(TTok::Dot);
                }
            }
        }
    }
    Ok(out)
}

/// Turtle-like triples: `s p o [, o]* [; p o]* .` repeated; the final '.' is optional.
fn parse_target(
    src: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<Vec<TargetTemplate>, String> {
    let toks = tokenize_target(src, prefixes)?;
    let mut out = Vec::new();
    let mut i = 0;
    let term = |i: &mut usize, what: &str| -> Result<TermTemplate, String> {
        match toks.get(*i) {
            Some(TTok::Term(t)) => {
                *i += 1;
                Ok(t.clone())
            }
            other => Err(format!("expected {what}, found {other:?}")),
        }
    };
    while i < toks.len() {
        let subject = term(&mut i, "subject")?;
        if !subject.produces_iri() {
            return Err(format!(
                "subject template {subject} does not produce an IRI"
            ));
        }
        loop {
            let predicate = term(&mut i, "predicate")?;
            if !predicate.produces_iri() {
                return Err(format!(
                    "predicate template {predicate} does not produce an IRI"
                ));
            }
            loop {
                let object = term(&mut i, "object")?;
                out.push(TargetTemplate {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if toks.get(i) == Some(&TTok::Comma) {
                    i += 1;
                    continue;
                }
                break;
            }
            match toks.get(i) {
                Some(TTok::Semi) => {
                    while toks.get(i) == Some(&TTok::Semi) {
                        i += 1;
                    }
                    if matches!(toks.get(i), None | Some(TTok::Dot)) {
                        break;
                    }
                }
                _ => break,
            }
        }
        match toks.get(i) {
            Some(TTok::Dot) => {
                while toks.get(i) == Some(&TTok::Dot) {
                    i += 1;
                }
            }
            None => {}
            Some(other) => return Err(format!("expected '.' or ';', found {other:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty target".into());
    }
    Ok(out)
}
