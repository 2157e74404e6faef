//! RDF terms, triples, graphs, graph patterns and solution mappings, plus the
//! reference pattern evaluator.

mod eval;
mod model;
mod term;

pub use eval::{
    apply_mapping_to_pattern, canonical_multiset, evaluate_pattern, evaluate_triple_pattern, join,
    left_outer_join,
};
pub use model::{
    GraphPattern, RdfGraph, SolutionMapping, TermPattern, Triple, TriplePattern, Variable,
};
pub use term::{Literal, Term, OWL, RDF, RDFS, RDF_TYPE, XSD};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RdfError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguageTag(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("term {1} is not allowed in {0} position")]
    Position(&'static str, String),
    #[error("pattern is not ground: {0} is unbound")]
    NotGround(String),
}
