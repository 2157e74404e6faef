use super::{arg_or_positional, normalize_headers};
use crate::vsql::OperatorInvocation;
use crate::vtable::{FetchContext, Operator, OperatorError, SourceRecord};

/// CSV file as a table: `(filetable path:data.csv [header:none] [delimiter:;])`.
/// Relative paths resolve against the fixture directory; empty cells are NULL.
#[derive(Debug, Default, Clone, Copy)]
pub struct FileTable;

fn delimiter(inv: &OperatorInvocation) -> Result<u8, String> {
    match inv.arg("delimiter") {
        None => Ok(b','),
        Some("tab") | Some("\\t") => Ok(b'\t'),
        Some(d) if d.len() == 1 => Ok(d.as_bytes()[0]),
        Some(d) => Err(format!("delimiter must be one byte, found {d:?}")),
    }
}

impl Operator for FileTable {
    fn check_args(&self, inv: &OperatorInvocation) -> Result<(), String> {
        arg_or_positional(inv, "path", 1).ok_or("missing 'path'")?;
        delimiter(inv)?;
        Ok(())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        let path = arg_or_positional(inv, "path", 1)
            .ok_or_else(|| OperatorError::InvalidArgs("missing 'path'".into()))?;
        let delim = delimiter(inv).map_err(OperatorError::InvalidArgs)?;
        let url = if path.contains("://") || path.starts_with("file:") {
            path.to_string()
        } else {
            format!("file:{path}")
        };
        let resp = ctx.fetcher.get(&url, None)?;
        if !resp.is_success() {
            return Err(OperatorError::Fetch(format!(
                "{url} returned status {}",
                resp.status
            )));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .delimiter(delim)
            .from_reader(resp.body.as_slice());
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| OperatorError::Fetch(format!("{path}: {e}")))?;
            rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
        }
        let no_header = inv
            .arg("header")
            .is_some_and(|h| h.eq_ignore_ascii_case("none"));
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let (header, body) = if no_header {
            ((1..=width).map(|i| format!("col{i}")).collect(), &rows[..])
        } else if let Some((h, rest)) = rows.split_first() {
            (
                normalize_headers(h.iter().map(|s| s.trim().to_string()).collect()),
                rest,
            )
        } else {
            (Vec::new(), &rows[..])
        };
        Ok(body
            .iter()
            .map(|r| {
                SourceRecord::new(
                    header
                        .iter()
                        .enumerate()
                        .map(|(i, name)| {
                            let v = r.get(i).filter(|v| !v.is_empty()).cloned();
                            (name.clone(), v)
                        })
                        .collect(),
                )
            })
            .collect())
    }
}
