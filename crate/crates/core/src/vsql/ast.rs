use std::fmt;

use serde::{Deserialize, Serialize};

/// Column name every virtual table starts with.
pub const TUPLE_ID: &str = "tupleID";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VSqlQuery {
    pub distinct: bool,
    pub select: Vec<SelectItem>,
    pub from: FromClause,
    pub filter: Vec<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectItem {
    /// `*`: every source column except tupleID.
    Wildcard,
    Expr {
        expr: Expr,
        alias: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Column(String),
    /// `"name"`: a column if one matches, otherwise a string constant.
    Quoted(String),
    Str(String),
    Concat(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FromClause {
    Operator(OperatorInvocation),
    Subquery(Box<VSqlQuery>),
}

/// `left = right`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub left: Expr,
    pub right: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperatorInvocation {
    /// Lowercased.
    pub name: String,
    pub args: Vec<(String, String)>,
    /// Cache window in milliseconds.
    pub f: Option<i64>,
}

impl OperatorInvocation {
    pub fn new(name: &str, args: Vec<(String, String)>, f: Option<i64>) -> Self {
        Self {
            name: name.to_ascii_lowercase(),
            args,
            f,
        }
    }

    pub fn arg(&self, key: &str) -> Option<&str> {
        self.args
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.as_str())
    }

    pub fn signature(&self) -> OperatorSignature {
        let mut args = self.args.clone();
        args.sort();
        OperatorSignature {
            name: self.name.clone(),
            args,
        }
    }
}

impl fmt::Display for OperatorInvocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for (k, v) in &self.args {
            write!(f, " {k}:{}", quote_arg(v))?;
        }
        if let Some(w) = self.f {
            write!(f, " f:{w}")?;
        }
        write!(f, ")")
    }
}

fn quote_arg(v: &str) -> String {
    let plain = !v.is_empty()
        && !v
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '\'' | '"'));
    if plain {
        v.to_string()
    } else {
        format!("'{}'", v.replace('\'', "''"))
    }
}

/// Cache identity of an invocation: operator name plus args sorted by key.
/// The window `f` is not part of it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OperatorSignature {
    pub name: String,
    pub args: Vec<(String, String)>,
}

impl fmt::Display for OperatorSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (k, v)) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{}", quote_arg(v))?;
        }
        write!(f, ")")
    }
}

fn write_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if !name.is_empty()
        && name
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_')
        && !super::parser::is_reserved(name)
    {
        f.write_str(name)
    } else {
        write!(f, "\"{}\"", name.replace('"', "\"\""))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column(c) => write_ident(f, c),
            Expr::Quoted(c) => write!(f, "\"{}\"", c.replace('"', "\"\"")),
            Expr::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Expr::Concat(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("||")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for VSqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("select ")?;
        if self.distinct {
            f.write_str("distinct ")?;
        }
        for (i, item) in self.select.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match item {
                SelectItem::Wildcard => f.write_str("*")?,
                SelectItem::Expr { expr, alias } => {
                    write!(f, "{expr}")?;
                    if let Some(a) = alias {
                        f.write_str(" as ")?;
                        write_ident(f, a)?;
                    }
                }
            }
        }
        f.write_str(" from ")?;
        match &self.from {
            FromClause::Operator(inv) => write!(f, "{inv}")?,
            FromClause::Subquery(q) => write!(f, "({q})")?,
        }
        for (i, p) in self.filter.iter().enumerate() {
            f.write_str(if i == 0 { " where " } else { " and " })?;
            write!(f, "{} = {}", p.left, p.right)?;
        }
        Ok(())
    }
}

impl VSqlQuery {
    /// Output column names known without evaluation; `None` when a wildcard
    /// makes them depend on the source.
    pub fn output_names(&self) -> Option<Vec<String>> {
        let mut out = vec![TUPLE_ID.to_string()];
        for item in &self.select {
            match item {
                SelectItem::Wildcard => return None,
                SelectItem::Expr { expr, alias } => {
                    let name = item_name(expr, alias.as_deref());
                    if !name.eq_ignore_ascii_case(TUPLE_ID) {
                        out.push(name);
                    }
                }
            }
        }
        Some(out)
    }

    /// Every operator invocation reachable from this query.
    pub fn invocations(&self) -> Vec<&OperatorInvocation> {
        match &self.from {
            FromClause::Operator(inv) => vec![inv],
            FromClause::Subquery(q) => q.invocations(),
        }
    }

    pub fn invocations_mut(&mut self) -> Vec<&mut OperatorInvocation> {
        match &mut self.from {
            FromClause::Operator(inv) => vec![inv],
            FromClause::Subquery(q) => q.invocations_mut(),
        }
    }
}

/// Name of a select item's output column.
pub(crate) fn item_name(expr: &Expr, alias: Option<&str>) -> String {
    match (alias, expr) {
        (Some(a), _) => a.to_string(),
        (None, Expr::Column(c) | Expr::Quoted(c)) => c.clone(),
        (None, e) => e.to_string(),
    }
}
