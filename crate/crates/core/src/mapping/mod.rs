//! The native mapping language and target-template instantiation.

mod parser;
mod spec;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rdf::{Term, Triple};

pub use spec::{parse_ontology_classes, ObdaSpec};
pub use template::{
    decode_hole, encode_hole, is_column_identifier, lexical_form_is_valid, CompiledTemplate,
    Segment, Template, TermTemplate,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("{}line {line}: {message}", context(.mapping_id))]
    Syntax {
        mapping_id: Option<String>,
        line: usize,
        message: String,
    },
    #[error("duplicate mappingId {0:?}")]
    DuplicateId(String),
    #[error("mapping {mapping_id:?}: invalid source query: {message}")]
    Source { mapping_id: String, message: String },
    #[error("mapping {mapping_id:?}: unknown operator {operator:?}")]
    UnknownOperator {
        mapping_id: String,
        operator: String,
    },
    #[error("mapping {mapping_id:?}: operator {operator:?}: {message}")]
    OperatorArgs {
        mapping_id: String,
        operator: String,
        message: String,
    },
    #[error("mapping {mapping_id:?}: column {column:?} is not produced by the source query (available: {})", .available.join(", "))]
    MissingColumn {
        mapping_id: String,
        column: String,
        available: Vec<String>,
    },
}

fn context(id: &Option<String>) -> String {
    match id {
        Some(id) => format!("mapping {id:?}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetTemplate {
    pub subject: TermTemplate,
    pub predicate: TermTemplate,
    pub object: TermTemplate,
}

impl TargetTemplate {
    pub fn holes(&self) -> Vec<&str> {
        let mut out = self.subject.holes();
        out.extend(self.predicate.holes());
        out.extend(self.object.holes());
        out
    }

    pub fn positions(&self) -> [&TermTemplate; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Binds every hole to a column of `columns`.
    pub fn compile(&self, columns: &[String]) -> Result<CompiledTarget, String> {
        Ok(CompiledTarget {
            subject: self.subject.compile(columns)?,
            predicate: self.predicate.compile(columns)?,
            object: self.object.compile(columns)?,
        })
    }
}

impl fmt::Display for TargetTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone)]
pub struct CompiledTarget {
    pub subject: CompiledTemplate,
    pub predicate: CompiledTemplate,
    pub object: CompiledTemplate,
}

impl CompiledTarget {
    /// `None` when a hole is NULL or the instantiated terms do not form a triple.
    pub fn instantiate(&self, row: &[Option<String>]) -> Option<Triple> {
        let s = self.subject.instantiate(row)?;
        let p = self.predicate.instantiate(row)?;
        let o = self.object.instantiate(row)?;
        Triple::new(s, p, o).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingAxiom {
    pub id: String,
    pub source_sql: String,
    pub targets: Vec<TargetTemplate>,
}

impl MappingAxiom {
    /// Holes used by any target, in first-use order without repeats.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in &self.targets {
            for h in t.holes() {
                if !out.contains(&h) {
                    out.push(h);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MappingCollection {
    pub prefixes: BTreeMap<String, String>,
    pub axioms: Vec<MappingAxiom>,
}

impl MappingCollection {
    pub fn axiom(&self, id: &str) -> Option<&MappingAxiom> {
        self.axioms.iter().find(|a| a.id == id)
    }
}

pub fn parse_mappings(text: &str) -> Result<MappingCollection, MappingError> {
    parser::parse(text)
}

impl std::str::FromStr for MappingCollection {
    type Err = MappingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mappings(s)
    }
}

/// Applies every target of `axiom` to one row of its source table.
/// Templates whose holes hit a NULL cell are skipped.
pub fn instantiate_targets(
    axiom: &MappingAxiom,
    columns: &[String],
    row: &[Option<String>],
) -> Result<Vec<Triple>, MappingError> {
    let compiled = compile_targets(axiom, columns)?;
    Ok(compiled.iter().filter_map(|c| c.instantiate(row)).collect())
}

pub fn compile_targets(
    axiom: &MappingAxiom,
    columns: &[String],
) -> Result<Vec<CompiledTarget>, MappingError> {
    axiom
        .targets
        .iter()
        .map(|t| {
            t.compile(columns)
                .map_err(|column| MappingError::MissingColumn {
                    mapping_id: axiom.id.clone(),
                    column,
                    available: columns.to_vec(),
                })
        })
        .collect()
}

/// Constant-term lookup used by unfolding when a target position never varies.
pub fn constant_term(t: &TermTemplate) -> Option<&Term> {
    match t {
        TermTemplate::Constant(term) => Some(term),
        _ => None,
    }
}
