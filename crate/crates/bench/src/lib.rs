//! Desk-scale benchmarks for vweave: synthetic WebTable scalability runs,
//! warm and cold cache timing, and a simulator of a SERVICE-to-API style
//! federation used as a baseline for API-call counts and answer quality.

pub mod polls;
pub mod report;
pub mod s2a;
pub mod scalability;
pub mod score;

use thiserror::Error;

pub use polls::{generate_webtable, write_webtable, SyntheticTableSpec};
pub use report::{BenchReport, BenchRow};
pub use s2a::{
    run_s2a, simulate_service_to_api, yelp_suite, Extraction, MapFetcher, S2AMode, S2AOutcome,
    S2AQuerySpec,
};
pub use scalability::{run_scalability, ScalabilityConfig, Q_HIGH, Q_LOW};
pub use score::{score, Score};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{planted} planted rows do not fit in a {rows}-row table")]
    TooManyPlanted { planted: usize, rows: usize },
    #[error("template must have at least one row")]
    EmptyTemplate,
    #[error("invalid S2A query {name:?}: {message}")]
    InvalidSpec { name: String, message: String },
    #[error("no fixture response for {url}: {message}")]
    MissingFixture { url: String, message: String },
    #[error("bad JSON from {url}: {message}")]
    BadJson { url: String, message: String },
    #[error("invalid JSON path {0:?}")]
    BadPath(String),
    #[error(transparent)]
    Engine(#[from] vweave_core::EngineError),
    #[error(transparent)]
    Mapping(#[from] vweave_core::mapping::MappingError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("setup failed: {0}")]
    Setup(String),
    #[error("plot: {0}")]
    Plot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
