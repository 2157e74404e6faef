use std::collections::HashSet;
use std::sync::Arc;

use super::ast::{
    item_name, Expr, FromClause, OperatorInvocation, SelectItem, VSqlQuery, TUPLE_ID,
};
use super::{resolve_column, Row, VirtualTable, VsqlError};
use crate::vtable::SourceError;

/// Produces the table of an operator invocation.
pub trait SourceProvider {
    fn invoke(&self, inv: &OperatorInvocation) -> Result<Arc<VirtualTable>, SourceError>;
}

/// Expression compiled against a column list.
enum Compiled {
    Column(usize),
    Const(String),
    Concat(Vec<Compiled>),
}

impl Compiled {
    fn eval<'r>(&'r self, row: &'r Row) -> Option<std::borrow::Cow<'r, str>> {
        match self {
            Compiled::Column(i) => row[*i].as_deref().map(std::borrow::Cow::Borrowed),
            Compiled::Const(s) => Some(std::borrow::Cow::Borrowed(s)),
            Compiled::Concat(parts) => {
                let mut out = String::new();
                for p in parts {
                    out.push_str(&p.eval(row)?);
                }
                Some(std::borrow::Cow::Owned(out))
            }
        }
    }
}

fn compile(expr: &Expr, columns: &[String]) -> Result<Compiled, VsqlError> {
    Ok(match expr {
        Expr::Column(c) => Compiled::Column(resolve_column(columns, c).ok_or_else(|| {
            VsqlError::UnknownColumn {
                column: c.clone(),
                available: columns.to_vec(),
            }
        })?),
        // SQLite reads a double-quoted name that matches no column as a string
        Expr::Quoted(c) => match resolve_column(columns, c) {
            Some(i) => Compiled::Column(i),
            None => Compiled::Const(c.clone()),
        },
        Expr::Str(s) => Compiled::Const(s.clone()),
        Expr::Concat(parts) => Compiled::Concat(
            parts
                .iter()
                .map(|p| compile(p, columns))
                .collect::<Result<_, _>>()?,
        ),
    })
}

pub fn eval_vsql(q: &VSqlQuery, rt: &dyn SourceProvider) -> Result<VirtualTable, VsqlError> {
    let source: Arc<VirtualTable> = match &q.from {
        FromClause::Operator(inv) => rt.invoke(inv)?,
        FromClause::Subquery(inner) => Arc::new(eval_vsql(inner, rt)?),
    };
    match project(q, &source) {
        // an empty source may lack the columns its operator would normally produce
        Err(VsqlError::UnknownColumn { .. }) if source.is_empty() => {
            let names = q
                .output_names()
                .unwrap_or_else(|| vec![TUPLE_ID.to_string()]);
            Ok(VirtualTable::new(names, vec![]).expect("tupleID leads output names"))
        }
        other => other,
    }
}

fn project(q: &VSqlQuery, source: &VirtualTable) -> Result<VirtualTable, VsqlError> {
    let columns = source.columns();
    let mut filters = Vec::with_capacity(q.filter.len());
    for p in &q.filter {
        filters.push((compile(&p.left, columns)?, compile(&p.right, columns)?));
    }

    let mut names = vec![TUPLE_ID.to_string()];
    let mut exprs = Vec::new();
    let mut push = |name: String, c: Compiled, names: &mut Vec<String>| -> Result<(), VsqlError> {
        if names.iter().any(|n| n.eq_ignore_ascii_case(&name)) {
            return Err(VsqlError::DuplicateColumn(name));
        }
        names.push(name);
        exprs.push(c);
        Ok(())
    };
    for item in &q.select {
        match item {
            SelectItem::Wildcard => {
                for (i, c) in columns.iter().enumerate().skip(1) {
                    push(c.clone(), Compiled::Column(i), &mut names)?;
                }
            }
            SelectItem::Expr { expr, alias } => {
                let name = item_name(expr, alias.as_deref());
                let compiled = compile(expr, columns)?;
                if name.eq_ignore_ascii_case(TUPLE_ID) {
                    // the identifier column is always carried through
                    if matches!(compiled, Compiled::Column(0)) {
                        continue;
                    }
                    return Err(VsqlError::DuplicateColumn(name));
                }
                push(name, compiled, &mut names)?;
            }
        }
    }

    let mut rows = Vec::new();
    let mut seen: HashSet<Vec<Option<String>>> = HashSet::new();
    for row in source.rows() {
        let keep = filters
            .iter()
            .all(|(l, r)| match (l.eval(row), r.eval(row)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            });
        if !keep {
            continue;
        }
        let cells: Vec<Option<String>> = exprs
            .iter()
            .map(|e| e.eval(row).map(|v| v.into_owned()))
            .collect();
        if q.distinct {
            if !seen.insert(cells.clone()) {
                continue;
            }
            let mut out = Vec::with_capacity(cells.len() + 1);
            out.push(Some((rows.len() + 1).to_string()));
            out.extend(cells);
            rows.push(out);
        } else {
            let mut out = Vec::with_capacity(cells.len() + 1);
            out.push(row[0].clone());
            out.extend(cells);
            rows.push(out);
        }
    }
    Ok(VirtualTable::new(names, rows).expect("projection preserves table invariants"))
}
