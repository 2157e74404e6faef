//! Ontology-based data access over Web sources. SPARQL queries are unfolded
//! through mappings onto extended-SQL source queries whose virtual-table
//! operators fetch HTML tables, JSON APIs and local files at query time.

pub mod engine;
pub mod mapping;
pub mod rdf;
pub mod results;
pub mod sparql;
pub mod vsql;
pub mod vtable;

pub use engine::{Engine, EngineError, QueryAnswer, QueryOptions};
pub use mapping::{parse_mappings, ObdaSpec};
pub use sparql::parse_sparql;
pub use vtable::{Registry, VTableRuntime};
