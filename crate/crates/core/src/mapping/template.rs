use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use crate::rdf::{Literal, Term, XSD};
use crate::vsql::resolve_column;

/// Everything outside the RFC 3986 unreserved set is escaped in IRI holes.
const IRI_HOLE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

pub fn encode_hole(value: &str) -> String {
    utf8_percent_encode(value, IRI_HOLE).to_string()
}

pub fn decode_hole(encoded: &str) -> Option<String> {
    percent_decode_str(encoded)
        .decode_utf8()
        .ok()
        .map(|s| s.into_owned())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Text(String),
    Hole(String),
}

/// A string with `{column}` holes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn new(segments: Vec<Segment>) -> Self {
        // merge adjacent text so the representation is canonical
        let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
        for s in segments {
            match (out.last_mut(), s) {
                (_, Segment::Text(t)) if t.is_empty() => {}
                (Some(Segment::Text(prev)), Segment::Text(t)) => prev.push_str(&t),
                (_, s) => out.push(s),
            }
        }
        Self { segments: out }
    }

    /// Parses `text{col}text...`. Holes may not nest; `\{` and `\}` escape braces.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut segments = Vec::new();
        let mut buf = String::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(e @ ('{' | '}' | '\\')) => buf.push(e),
                    Some(other) => {
                        buf.push('\\');
                        buf.push(other);
                    }
                    None => buf.push('\\'),
                },
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some('{') => return Err(format!("nested '{{' in template {text:?}")),
                            Some(c) => name.push(c),
                            None => return Err(format!("unclosed '{{' in template {text:?}")),
                        }
                    }
                    let name = name.trim().to_string();
                    if !is_column_identifier(&name) {
                        return Err(format!("invalid placeholder {{{name}}}"));
                    }
                    segments.push(Segment::Text(std::mem::take(&mut buf)));
                    segments.push(Segment::Hole(name));
                }
                '}' => return Err(format!("unbalanced '}}' in template {text:?}")),
                c => buf.push(c),
            }
        }
        segments.push(Segment::Text(buf));
        Ok(Self::new(segments))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn holes(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Hole(h) => Some(h.as_str()),
            Segment::Text(_) => None,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.holes().next().is_none()
    }

    /// Leading constant text (empty if the template starts with a hole).
    pub fn constant_prefix(&self) -> &str {
        match self.segments.first() {
            Some(Segment::Text(t)) => t,
            _ => "",
        }
    }

    /// `Some((prefix, hole))` for templates of the shape `prefix{hole}`.
    pub fn suffix_hole(&self) -> Option<(&str, &str)> {
        match self.segments.as_slice() {
            [Segment::Text(p), Segment::Hole(h)] => Some((p, h)),
            [Segment::Hole(h)] => Some(("", h)),
            _ => None,
        }
    }

    fn render(
        &self,
        lookup: &mut dyn FnMut(&str) -> Option<String>,
        encode: bool,
    ) -> Option<String> {
        let mut out = String::new();
        for s in &self.segments {
            match s {
                Segment::Text(t) => out.push_str(t),
                Segment::Hole(h) => {
                    let v = lookup(h)?;
                    if encode {
                        out.push_str(&encode_hole(&v));
                    } else {
                        out.push_str(&v);
                    }
                }
            }
        }
        Some(out)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.segments {
            match s {
                Segment::Text(t) => {
                    for c in t.chars() {
                        if matches!(c, '{' | '}' | '\\') {
                            write!(f, "\\")?;
                        }
                        write!(f, "{c}")?;
                    }
                }
                Segment::Hole(h) => write!(f, "{{{h}}}")?,
            }
        }
        Ok(())
    }
}

pub fn is_column_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// One position of a target triple template.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermTemplate {
    Constant(Term),
    Iri(Template),
    Literal {
        template: Template,
        datatype: Option<String>,
        language: Option<String>,
    },
}

impl TermTemplate {
    pub fn holes(&self) -> Vec<&str> {
        match self {
            TermTemplate::Constant(_) => vec![],
            TermTemplate::Iri(t) | TermTemplate::Literal { template: t, .. } => t.holes().collect(),
        }
    }

    pub fn produces_iri(&self) -> bool {
        match self {
            TermTemplate::Constant(t) => t.is_iri(),
            TermTemplate::Iri(_) => true,
            TermTemplate::Literal { .. } => false,
        }
    }

    /// Builds the term from hole values; `None` when a hole value is NULL.
    pub fn instantiate_with(&self, lookup: &mut dyn FnMut(&str) -> Option<String>) -> Option<Term> {
        match self {
            TermTemplate::Constant(t) => Some(t.clone()),
            TermTemplate::Iri(t) => Some(Term::Iri(t.render(lookup, true)?)),
            TermTemplate::Literal {
                template,
                datatype,
                language,
            } => {
                let lexical = template.render(lookup, false)?;
                let lit = match (datatype, language) {
                    (Some(dt), _) => Literal::typed(lexical, dt.clone()).ok()?,
                    (None, Some(tag)) => Literal::lang(lexical, tag.clone()).ok()?,
                    (None, None) => Literal::plain(lexical),
                };
                Some(Term::Literal(lit))
            }
        }
    }

    /// Resolves hole names against a column list for fast per-row instantiation.
    pub fn compile(&self, columns: &[String]) -> Result<CompiledTemplate, String> {
        let mut indices = Vec::new();
        for h in self.holes() {
            let idx = resolve_column(columns, h).ok_or_else(|| h.to_string())?;
            indices.push(idx);
        }
        Ok(CompiledTemplate {
            template: self.clone(),
            indices,
        })
    }
}

impl fmt::Display for TermTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermTemplate::Constant(t) => write!(f, "{t}"),
            TermTemplate::Iri(t) => write!(f, "<{t}>"),
            TermTemplate::Literal {
                template,
                datatype,
                language,
            } => {
                write!(f, "\"{template}\"")?;
                if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")?;
                } else if let Some(tag) = language {
                    write!(f, "@{tag}")?;
                }
                Ok(())
            }
        }
    }
}

/// A [`TermTemplate`] whose holes are bound to column indices.
#[derive(Debug, Clone)]
pub struct CompiledTemplate {
    template: TermTemplate,
    indices: Vec<usize>,
}

impl CompiledTemplate {
    pub fn template(&self) -> &TermTemplate {
        &self.template
    }

    pub fn columns(&self) -> &[usize] {
        &self.indices
    }

    pub fn instantiate(&self, row: &[Option<String>]) -> Option<Term> {
        let mut i = 0;
        let indices = &self.indices;
        self.template.instantiate_with(&mut |_| {
            let v = row[indices[i]].clone();
            i += 1;
            v
        })
    }
}

/// Whether `lexical` belongs to the lexical space of a handful of common XSD
/// datatypes. Unknown datatypes are accepted.
pub fn lexical_form_is_valid(lexical: &str, datatype: &str) -> bool {
    let Some(local) = datatype.strip_prefix(XSD) else {
        return true;
    };
    let int_like = |s: &str| {
        let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
        !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
    };
    match local {
        "int" | "integer" | "long" | "short" | "byte" | "nonNegativeInteger"
        | "positiveInteger" | "unsignedInt" | "unsignedLong" => int_like(lexical),
        "decimal" => {
            let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
            let mut parts = body.splitn(2, '.');
            let a = parts.next().unwrap_or("");
            let b = parts.next().unwrap_or("");
            !(a.is_empty() && b.is_empty())
                && a.chars().all(|c| c.is_ascii_digit())
                && b.chars().all(|c| c.is_ascii_digit())
        }
        "float" | "double" => {
            matches!(lexical, "INF" | "-INF" | "+INF" | "NaN")
                || (lexical.parse::<f64>().is_ok()
                    && !lexical.eq_ignore_ascii_case("inf")
                    && !lexical.to_ascii_lowercase().contains("infinity")
                    && !lexical.eq_ignore_ascii_case("nan"))
        }
        "boolean" => matches!(lexical, "true" | "false" | "1" | "0"),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_holes_and_text() {
        let t = Template::parse("http://twitter.com/{id}").unwrap();
        assert_eq!(t.suffix_hole(), Some(("http://twitter.com/", "id")));
        assert_eq!(t.holes().collect::<Vec<_>>(), vec!["id"]);
        let t = Template::parse("a{x}b{y}").unwrap();
        assert!(t.suffix_hole().is_none());
        assert!(Template::parse("a{x").is_err());
        assert!(Template::parse("a{not valid}").is_err());
        assert!(Template::parse("plain").unwrap().is_constant());
    }

    #[test]
    fn iri_holes_are_percent_encoded() {
        let t = TermTemplate::Iri(Template::parse("http://twitter.com/{id}").unwrap());
        let term = t
            .instantiate_with(&mut |_| Some("a b".to_string()))
            .unwrap();
        assert_eq!(term, Term::Iri("http://twitter.com/a%20b".into()));
        assert_eq!(encode_hole("x!#%&/é"), "x%21%23%25%26%2F%C3%A9");
        assert_eq!(encode_hole("A-z_0.9~"), "A-z_0.9~");
        assert_eq!(decode_hole("x%21%23%25%26%2F%C3%A9").unwrap(), "x!#%&/é");
    }

    #[test]
    fn literal_holes_are_verbatim() {
        let t = TermTemplate::Literal {
            template: Template::parse("{h}").unwrap(),
            datatype: Some(format!("{XSD}integer")),
            language: None,
        };
        let term = t.instantiate_with(&mut |_| Some("7".into())).unwrap();
        assert_eq!(
            term,
            Term::typed_literal("7", format!("{XSD}integer")).unwrap()
        );
        assert!(t.instantiate_with(&mut |_| None).is_none());
    }

    #[test]
    fn datatype_lint() {
        let x = |l: &str| format!("{XSD}{l}");
        assert!(lexical_form_is_valid("7", &x("integer")));
        assert!(!lexical_form_is_valid("7.5", &x("int")));
        assert!(!lexical_form_is_valid("99%", &x("int")));
        assert!(lexical_form_is_valid("1.5", &x("float")));
        assert!(lexical_form_is_valid("-2.", &x("decimal")));
        assert!(!lexical_form_is_valid("abc", &x("double")));
        assert!(lexical_form_is_valid("anything", "http://ex.org/custom"));
    }
}
