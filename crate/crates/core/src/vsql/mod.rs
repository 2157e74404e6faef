//! The extended-SQL dialect used in mapping sources: a single SELECT over a
//! virtual-table operator invocation or a nested SELECT, with `||`
//! concatenation, aliases and equality filters.

mod ast;
mod eval;
mod parser;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{
    Expr, FromClause, OperatorInvocation, OperatorSignature, Predicate, SelectItem, VSqlQuery,
    TUPLE_ID,
};
pub use eval::{eval_vsql, SourceProvider};

use crate::vtable::SourceError;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VsqlError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no such column {column:?} (available: {})", .available.join(", "))]
    UnknownColumn {
        column: String,
        available: Vec<String>,
    },
    #[error("duplicate output column {0:?}")]
    DuplicateColumn(String),
    #[error(transparent)]
    Source(#[from] SourceError),
}

pub fn parse_vsql(text: &str) -> Result<VSqlQuery, VsqlError> {
    parser::parse(text)
}

impl std::str::FromStr for VSqlQuery {
    type Err = VsqlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_vsql(s)
    }
}

/// Finds `name` among `columns`: exact match first, then ASCII case-insensitive.
pub fn resolve_column(columns: &[String], name: &str) -> Option<usize> {
    columns
        .iter()
        .position(|c| c == name)
        .or_else(|| columns.iter().position(|c| c.eq_ignore_ascii_case(name)))
}

pub type Row = Vec<Option<String>>;

/// A relation `[tupleID, cols...]` of strings and NULLs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualTable {
    columns: Vec<String>,
    rows: Vec<Row>,
}

impl VirtualTable {
    pub fn new(columns: Vec<String>, rows: Vec<Row>) -> Result<Self, String> {
        if columns.first().map(String::as_str) != Some(TUPLE_ID) {
            return Err(format!("first column must be {TUPLE_ID}"));
        }
        let mut ids = HashSet::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                ));
            }
            match &row[0] {
                Some(id) if ids.insert(id.as_str()) => {}
                Some(id) => return Err(format!("duplicate {TUPLE_ID} {id:?}")),
                None => return Err(format!("row {i} has a NULL {TUPLE_ID}")),
            }
        }
        Ok(Self { columns, rows })
    }

    /// Numbers the rows 1..=n in order.
    pub fn from_cells(names: Vec<String>, cells: Vec<Row>) -> Result<Self, String> {
        let mut columns = Vec::with_capacity(names.len() + 1);
        columns.push(TUPLE_ID.to_string());
        columns.extend(names);
        let rows = cells
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.insert(0, Some((i + 1).to_string()));
                r
            })
            .collect();
        Self::new(columns, rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        resolve_column(&self.columns, name)
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.column_index(column)?;
        self.rows.get(row)?.get(c)?.as_deref()
    }

    /// CSV dump; NULL cells are written empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))
                .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
    }
}
