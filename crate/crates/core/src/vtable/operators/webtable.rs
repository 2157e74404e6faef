use scraper::{ElementRef, Html, Selector};

use super::{arg_or_positional, normalize_headers};
use crate::vsql::OperatorInvocation;
use crate::vtable::{FetchContext, Operator, OperatorError, SourceRecord};

/// The `index`-th (1-based) HTML table of a page:
/// `WebTable('url', 3)` or `(webtable url:... index:3 [header:none])`.
#[derive(Debug, Default, Clone, Copy)]
pub struct WebTable;

/// Upper bound for a single cell's colspan.
const MAX_COLSPAN: usize = 1000;

fn index_arg(inv: &OperatorInvocation) -> Result<usize, String> {
    match arg_or_positional(inv, "index", 2) {
        None => Ok(1),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i),
            _ => Err(format!("index must be a positive integer, found {v:?}")),
        },
    }
}

impl Operator for WebTable {
    fn check_args(&self, inv: &OperatorInvocation) -> Result<(), String> {
        arg_or_positional(inv, "url", 1).ok_or("missing 'url'")?;
        index_arg(inv)?;
        Ok(())
    }

    fn fetch(
        &self,
        inv: &OperatorInvocation,
        ctx: &FetchContext<'_>,
    ) -> Result<Vec<SourceRecord>, OperatorError> {
        let url = arg_or_positional(inv, "url", 1)
            .ok_or_else(|| OperatorError::InvalidArgs("missing 'url'".into()))?;
        let index = index_arg(inv).map_err(OperatorError::InvalidArgs)?;
        let resp = ctx.fetcher.get(url, None)?;
        if !resp.is_success() {
            return Err(OperatorError::Fetch(format!(
                "{url} returned status {}",
                resp.status
            )));
        }
        let no_header = inv
            .arg("header")
            .is_some_and(|h| h.eq_ignore_ascii_case("none"));
        let tables = parse_html_tables(&resp.text());
        let count = tables.len();
        let table = tables.into_iter().nth(index - 1).ok_or_else(|| {
            OperatorError::Fetch(format!(
                "table index out of range: requested table {index}, page has {count}"
            ))
        })?;
        Ok(records(table, no_header))
    }
}

/// A parsed table: rows of (cell text, is header cell), colspans expanded.
pub type HtmlTable = Vec<Vec<(String, bool)>>;

/// Every `<table>` of the document in document order.
pub fn parse_html_tables(html: &str) -> Vec<HtmlTable> {
    let doc = Html::parse_document(html);
    let sel = Selector::parse("table").expect("static selector");
    doc.select(&sel).map(table_rows).collect()
}

fn child_elements<'a>(e: ElementRef<'a>) -> impl Iterator<Item = ElementRef<'a>> {
    e.children().filter_map(ElementRef::wrap)
}

fn table_rows(table: ElementRef<'_>) -> HtmlTable {
    let mut rows = Vec::new();
    for child in child_elements(table) {
        match child.value().name() {
            "tr" => rows.push(row_cells(child)),
            "thead" | "tbody" | "tfoot" => {
                for tr in child_elements(child).filter(|e| e.value().name() == "tr") {
                    rows.push(row_cells(tr));
                }
            }
            _ => {}
        }
    }
    rows.retain(|r| !r.is_empty());
    rows
}

fn row_cells(tr: ElementRef<'_>) -> Vec<(String, bool)> {
    let mut cells = Vec::new();
    for cell in child_elements(tr) {
        let is_header = match cell.value().name() {
            "th" => true,
            "td" => false,
            _ => continue,
        };
        let text = cell.text().collect::<Vec<_>>().join(" ");
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
        let span = cell
            .value()
            .attr("colspan")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(1)
            .clamp(1, MAX_COLSPAN);
        for _ in 0..span {
            cells.push((text.clone(), is_header));
        }
    }
    cells
}

fn records(table: HtmlTable, no_header: bool) -> Vec<SourceRecord> {
    let width = table.iter().map(Vec::len).max().unwrap_or(0);
    let (header, body): (Vec<String>, &[Vec<(String, bool)>]) = if no_header {
        ((1..=width).map(|i| format!("col{i}")).collect(), &table[..])
    } else {
        let at = table
            .iter()
            .position(|r| r.iter().all(|(_, th)| *th))
            .unwrap_or(0);
        match table.get(at) {
            Some(h) => (
                normalize_headers(h.iter().map(|(t, _)| t.clone()).collect()),
                &table[at + 1..],
            ),
            None => (Vec::new(), &table[..]),
        }
    };
    body.iter()
        .map(|row| {
            SourceRecord::new(
                header
                    .iter()
                    .enumerate()
                    .map(|(i, name)| (name.clone(), row.get(i).map(|(t, _)| t.clone())))
                    .collect(),
            )
        })
        .collect()
}
