use super::{MappingCollection, MappingError};
use crate::rdf::Term;
use crate::vsql::{parse_vsql, resolve_column, VSqlQuery};
use crate::vtable::{Registry, SourceErrorKind};

/// Ontology classes, validated mappings and their parsed source queries.
#[derive(Debug, Clone)]
pub struct ObdaSpec {
    ontology_classes: Vec<String>,
    mappings: MappingCollection,
    sources: Vec<VSqlQuery>,
}

impl ObdaSpec {
    /// Checks that every source parses, names registered operators with
    /// acceptable arguments, and projects every column its targets use.
    pub fn new(mappings: MappingCollection, registry: &Registry) -> Result<Self, MappingError> {
        let mut sources = Vec::with_capacity(mappings.axioms.len());
        for axiom in &mappings.axioms {
            let q = parse_vsql(&axiom.source_sql).map_err(|e| MappingError::Source {
                mapping_id: axiom.id.clone(),
                message: e.to_string(),
            })?;
            for inv in q.invocations() {
                if let Err(e) = registry.check(inv) {
                    return Err(match e.kind {
                        SourceErrorKind::UnknownOperator => MappingError::UnknownOperator {
                            mapping_id: axiom.id.clone(),
                            operator: inv.name.clone(),
                        },
                        _ => MappingError::OperatorArgs {
                            mapping_id: axiom.id.clone(),
                            operator: inv.name.clone(),
                            message: e.message,
                        },
                    });
                }
            }
            if let Some(outputs) = q.output_names() {
                for hole in axiom.placeholders() {
                    if resolve_column(&outputs, hole).is_none() {
                        return Err(MappingError::MissingColumn {
                            mapping_id: axiom.id.clone(),
                            column: hole.to_string(),
                            available: outputs,
                        });
                    }
                }
            }
            sources.push(q);
        }
        Ok(Self {
            ontology_classes: Vec::new(),
            mappings,
            sources,
        })
    }

    pub fn with_ontology_classes(mut self, classes: Vec<String>) -> Self {
        self.ontology_classes = classes;
        self
    }

    pub fn ontology_classes(&self) -> &[String] {
        &self.ontology_classes
    }

    pub fn mappings(&self) -> &MappingCollection {
        &self.mappings
    }

    /// Parsed source of the `i`-th axiom.
    pub fn source(&self, i: usize) -> &VSqlQuery {
        &self.sources[i]
    }

    pub fn sources(&self) -> &[VSqlQuery] {
        &self.sources
    }
}

/// One class IRI per line, optionally in angle brackets; `#` starts a comment.
pub fn parse_ontology_classes(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split_once(" #").map_or(line, |(a, _)| a).trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let iri = line.trim_start_matches('<').trim_end_matches('>');
        Term::iri(iri).map_err(|e| format!("line {}: {e}", i + 1))?;
        out.push(iri.to_string());
    }
    Ok(out)
}
