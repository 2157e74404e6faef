use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde_json::Value;
use serde_json_path::JsonPath;

use crate::vsql::OperatorInvocation;
use crate::vtable::{FetchContext, Operator, OperatorError, Secret, SourceRecord};

const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

/// Settings of a JSON REST source. Invocation args override these and fill
/// the `{name}` holes of the URL template.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JsonApiSpec {
    pub url: Option<String>,
    /// Path to the array of records, e.g. `businesses[*]`.
    pub records: Option<String>,
    /// `name=path` or `path` entries separated by commas.
    pub attrs: Option<String>,
    /// Environment variable holding a bearer token for live requests.
    pub token_env: Option<String>,
    /// Args that must be present.
    pub required: Vec<String>,
}

/// Generic JSON API operator:
/// `(jsonapi url:'https://h/search?q={key}' records:'items[*]' attrs:'id,name=title' key:x)`.
#[derive(Debug, Default, Clone, Copy)]
pub struct JsonApi;

const RESERVED_ARGS: &[&str] = &["url", "records", "attrs", "token_env"];

/// Column name for an attribute path: `hereNow.count` becomes `hereNow_count`.
pub fn flatten_path_name(path: &str) -> String {
    let mut out = String::new();
    for c in path.trim_start_matches('$').chars() {
        if c.is_alphanumeric() || c == '_' {
            out.push(c);
        } else if !out.is_empty() && !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

fn json_path(path: &str) -> Result<JsonPath, String> {
    let p = path.trim();
    let full = if p.starts_with('$') {
        p.to_string()
    } else if p.starts_with('[') {
        format!("${p}")
    } else {
        format!("$.{p}")
    };
    JsonPath::parse(&full).map_err(|e| format!("invalid path {path:?}: {e}"))
}

fn stringify(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        other => Some(other.to_string()),
    }
}

struct Resolved {
    url: String,
    records: JsonPath,
    records_text: String,
    attrs: Vec<(String, JsonPath)>,
    token_env: Option<String>,
}

impl JsonApiSpec {
    fn setting<'a>(&'a self, inv: &'a OperatorInvocation, key: &str) -> Option<&'a str> {
        inv.arg(key).or(match key {
            "url" => self.url.as_deref(),
            "records" => self.records.as_deref(),
            "attrs" => self.attrs.as_deref(),
            "token_env" => self.token_env.as_deref(),
            _ => None,
        })
    }

    fn resolve(&self, inv: &OperatorInvocation) -> Result<Resolved, String> {
        for r in &self.required {
            if inv.arg(r).is_none() {
                return Err(format!("missing '{r}'"));
            }
        }
        let template = self.setting(inv, "url").ok_or("missing 'url'")?;
        let records_text = self.setting(inv, "records").ok_or("missing 'records'")?;
        let attrs_text = self.setting(inv, "attrs").ok_or("missing 'attrs'")?;

        let mut url = String::new();
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            url.push_str(&rest[..open]);
            let close = rest[open..]
                .find('}')
                .map(|c| open + c)
                .ok_or_else(|| format!("unterminated hole in URL template {template:?}"))?;
            let name = &rest[open + 1..close];
            let value = inv
                .args
                .iter()
                .find(|(k, _)| k == name && !RESERVED_ARGS.contains(&k.as_str()))
                .map(|(_, v)| v)
                .ok_or_else(|| format!("URL template needs argument '{name}'"))?;
            url.extend(utf8_percent_encode(value, QUERY_VALUE));
            rest = &rest[close + 1..];
        }
        url.push_str(rest);

        let mut attrs = Vec::new();
        for entry in attrs_text
            .split(',')
            .map(str::trim)
            .filter(|e| !e.is_empty())
        {
            let (name, path) = match entry.split_once('=') {
                Some((n, p)) => (n.trim().to_string(), p.trim()),
                None => (flatten_path_name(entry), entry),
            };
            if name.is_empty() {
                return Err(format!("attribute {entry:?} has no usable name"));
            }
            if attrs.iter().any(|(n, _)| n == &name) {
                return Err(format!("duplicate attribute {name:?}"));
            }
            attrs.push((name, json_path(path)?));
        }
        if attrs.is_empty() {
            return Err("no attributes requested".into());
        }
        Ok(Resolved {
            url,
            records: json_path(records_text)?,
            records_text: records_text.to_string(),
            attrs,
            token_env: self.setting(inv, "token_env").map(str::to_string),
        })
    }

    pub fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        let r = self.resolve(inv).map_err(OperatorError::InvalidArgs)?;
        let token = if r.url.starts_with("http") {
            r.token_env.as_deref().and_then(Secret::from_env)
        } else {
            None
        };
        let resp = ctx.fetcher.get(&r.url, token.as_ref())?;
        if !resp.is_success() {
            return Err(OperatorError::Fetch(format!(
                "{} returned status {}",
                r.url, resp.status
            )));
        }
        let doc: Value = serde_json::from_slice(&resp.body)
            .map_err(|e| OperatorError::Fetch(format!("{}: invalid JSON: {e}", r.url)))?;
        let found = r.records.query(&doc).all();
        if found.is_empty() && !records_container_exists(&r.records_text, &doc) {
            ctx.warn(&format!(
                "records path {:?} not found in response from {}",
                r.records_text, r.url
            ));
            return Ok(Vec::new());
        }
        Ok(found
            .into_iter()
            .map(|elem| {
                SourceRecord::new(
                    r.attrs
                        .iter()
                        .map(|(name, path)| {
                            let v = path.query(elem).first().and_then(stringify);
                            (name.clone(), v)
                        })
                        .collect(),
                )
            })
            .collect())
    }
}

/// For `items[*]`, whether `items` itself is present.
fn records_container_exists(records: &str, doc: &Value) -> bool {
    let Some(parent) = records.trim().strip_suffix("[*]") else {
        return false;
    };
    if parent.is_empty() || parent == "$" {
        return true;
    }
    json_path(parent).is_ok_and(|p| !p.query(doc).all().is_empty())
}

impl Operator for JsonApi {
    fn check_args(&self, inv: &OperatorInvocation) -> Result<(), String> {
        JsonApiSpec::default().resolve(inv).map(|_| ())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        JsonApiSpec::default().fetch(inv, ctx)
    }
}
