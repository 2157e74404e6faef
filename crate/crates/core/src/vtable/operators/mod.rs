//! Built-in operators.

mod filetable;
mod jsonapi;
mod presets;
mod webtable;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

pub use filetable::FileTable;
pub use jsonapi::{flatten_path_name, JsonApi, JsonApiSpec};
pub use presets::{foursquare_preset, twitter_preset, yelp_preset, Preset};
pub use webtable::{parse_html_tables, WebTable};

use super::{FetchContext, Operator, OperatorError, Registry, SourceRecord};
use crate::vsql::{OperatorInvocation, Row};

/// Settings shared by the built-in operators.
#[derive(Debug, Clone)]
pub struct StandardOptions {
    /// `host:port` of the sentiment classifier.
    pub sentiment_address: Option<String>,
    pub sentiment_timeout_ms: u64,
}

impl Default for StandardOptions {
    fn default() -> Self {
        Self {
            sentiment_address: None,
            sentiment_timeout_ms: 2_000,
        }
    }
}

impl Registry {
    /// filetable, webtable, jsonapi, twitterapi, foursqr and yelp.
    pub fn standard(options: &StandardOptions) -> Self {
        let mut r = Registry::new();
        r.register("filetable", Arc::new(FileTable));
        r.register("webtable", Arc::new(WebTable));
        r.register("jsonapi", Arc::new(JsonApi));
        r.register(
            "twitterapi",
            Arc::new(twitter_preset(
                options.sentiment_address.clone(),
                options.sentiment_timeout_ms,
            )),
        );
        r.register("foursqr", Arc::new(foursquare_preset()));
        r.register("yelp", Arc::new(yelp_preset()));
        r
    }
}

/// First positional argument or the named one.
pub(crate) fn arg_or_positional<'a>(
    inv: &'a OperatorInvocation,
    name: &str,
    position: usize,
) -> Option<&'a str> {
    inv.arg(name).or_else(|| inv.arg(&format!("arg{position}")))
}

/// Empty names become `colK` (1-based position); repeats get `_2`, `_3`, ...
pub(crate) fn normalize_headers(raw: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    for (i, name) in raw.into_iter().enumerate() {
        let base = if name.is_empty() {
            format!("col{}", i + 1)
        } else {
            name
        };
        let mut candidate = base.clone();
        let mut n = 2;
        while out.iter().any(|o| o == &candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        out.push(candidate);
    }
    out
}

/// In-memory tables selected by the `name` argument. Meant for tests and
/// generated workloads.
#[derive(Debug, Default, Clone)]
pub struct StaticTables {
    tables: Arc<RwLock<HashMap<String, (Vec<String>, Vec<Row>)>>>,
}

impl StaticTables {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, name: &str, columns: Vec<String>, rows: Vec<Row>) {
        self.tables
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(name.to_string(), (columns, rows));
    }
}

impl Operator for StaticTables {
    fn check_args(&self, inv: &OperatorInvocation) -> Result<(), String> {
        arg_or_positional(inv, "name", 1)
            .map(|_| ())
            .ok_or_else(|| "missing 'name'".to_string())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        _ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        let name = arg_or_positional(inv, "name", 1)
            .ok_or_else(|| OperatorError::InvalidArgs("missing 'name'".into()))?;
        let tables = self.tables.read().unwrap_or_else(|p| p.into_inner());
        let (columns, rows) = tables
            .get(name)
            .ok_or_else(|| OperatorError::Fetch(format!("no table named {name:?}")))?;
        Ok(rows
            .iter()
            .map(|r| SourceRecord::new(columns.iter().cloned().zip(r.iter().cloned()).collect()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_normalization() {
        assert_eq!(
            normalize_headers(vec!["a".into(), "".into(), "a".into(), "a".into()]),
            vec!["a", "col2", "a_2", "a_3"]
        );
    }
}
