mod common;

use std::sync::Arc;

use common::*;
use vweave_core::vsql::{eval_vsql, parse_vsql, VirtualTable, VsqlError};
use vweave_core::vtable::operators::StandardOptions;
use vweave_core::vtable::{
    ManualClock, Registry, RuntimeConfig, SourceErrorKind, VTableRuntime, WebFetcher,
};

fn run(rt: &VTableRuntime, q: &str) -> Result<VirtualTable, VsqlError> {
    eval_vsql(&parse_vsql(q).unwrap(), rt)
}

fn runtime_over(dir: &std::path::Path, live: bool) -> VTableRuntime {
    VTableRuntime::new(
        Registry::standard(&StandardOptions::default()),
        Arc::new(WebFetcher::new(dir).with_live(live)),
        Arc::new(ManualClock::new(0)),
        RuntimeConfig::default(),
    )
}

const WIKI: &str = "http://en.wikipedia.org/wiki/AFI%27s_100_Years...100_Movies";
const RT: &str = "http://www.rottentomatoes.com/top/bestofrt/";

#[test]
fn films_table_yields_four_records() {
    let fx = fixture_engine("movies", None);
    let t = run(&fx.runtime, &format!("select * from WebTable('{WIKI}',2)")).unwrap();
    assert_eq!(
        t.columns(),
        ["tupleID", "Film", "Release year", "2007 rank", "1998 rank"]
    );
    assert_eq!(t.len(), 4);
    assert_eq!(t.cell(1, "Film"), Some("Casablanca"));
    assert_eq!(t.cell(1, "Release year"), Some("1942"));
    let titles = run(
        &fx.runtime,
        &format!("select Film||\" (\"||\"Release year\"||\")\" as Title from WebTable('{WIKI}',2)"),
    )
    .unwrap();
    assert_eq!(titles.cell(1, "Title"), Some("Casablanca (1942)"));
}

#[test]
fn third_table_of_a_page() {
    let fx = fixture_engine("movies", None);
    let t = run(&fx.runtime, &format!("select * from WebTable('{RT}',3)")).unwrap();
    assert_eq!(
        t.columns(),
        [
            "tupleID",
            "Rank",
            "RatingTomatometer",
            "Title",
            "No. of Reviews"
        ]
    );
    assert_eq!(t.len(), 5);
    let ids: Vec<_> = t.rows().iter().map(|r| r[0].clone().unwrap()).collect();
    assert_eq!(ids, ["1", "2", "3", "4", "5"]);
}

#[test]
fn table_index_out_of_range() {
    let fx = fixture_engine("movies", None);
    let err = run(&fx.runtime, &format!("select * from WebTable('{WIKI}',9)")).unwrap_err();
    assert!(
        err.to_string().contains("table index out of range"),
        "{err}"
    );
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("one.html"),
        "<table><tr><th>a</th></tr></table>",
    )
    .unwrap();
    let rt = runtime_over(dir.path(), false);
    let err = run(&rt, "select * from (webtable url:file:one.html index:2)").unwrap_err();
    assert!(
        err.to_string().contains("table index out of range"),
        "{err}"
    );
}

#[test]
fn yelp_search_is_one_call_for_twenty_records() {
    let fx = fixture_engine("yelp", None);
    let t = run(&fx.runtime, "select * from (yelp key:Burgers near:Chicago)").unwrap();
    assert_eq!(t.columns(), ["tupleID", "id", "name", "rating"]);
    assert_eq!(t.len(), 20);
    assert!(t.rows().iter().all(|r| r.iter().all(Option::is_some)));
    assert_eq!(fx.runtime.stats().api_calls, 1);
}

#[test]
fn foursquare_flattens_nested_attributes() {
    let fx = fixture_engine("foursquare", None);
    let t = run(
        &fx.runtime,
        "select * from (foursqr key:coffee near:Chicago)",
    )
    .unwrap();
    assert!(t.columns().iter().any(|c| c == "hereNow_count"));
    assert_eq!(t.len(), 5);
    let coffee: Vec<_> = (0..t.len())
        .filter(|&i| t.cell(i, "category") == Some("Coffee"))
        .map(|i| t.cell(i, "hereNow_count").unwrap().to_string())
        .collect();
    assert_eq!(coffee, ["7", "3", "12"]);
}

#[test]
fn empty_or_missing_record_arrays() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.json"), r#"{"businesses": []}"#).unwrap();
    std::fs::write(dir.path().join("other.json"), r#"{"error": "none"}"#).unwrap();
    let rt = runtime_over(dir.path(), false);
    let q = |file: &str| {
        format!("select * from (jsonapi url:'file:{file}' records:'businesses[*]' attrs:'id,name')")
    };
    assert_eq!(run(&rt, &q("empty.json")).unwrap().len(), 0);
    assert_eq!(rt.stats().warnings, 0);
    assert_eq!(run(&rt, &q("other.json")).unwrap().len(), 0);
    assert_eq!(rt.stats().warnings, 1);
}

#[test]
fn live_requests_and_non_success_status() {
    let (base, seen) = spawn_http(vec![
        (
            "/items?q=a%20b",
            200,
            r#"{"items":[{"id":1,"ok":true},{"id":2,"ok":false},{"id":3}]}"#.into(),
        ),
        ("/broken", 503, "{}".into()),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let rt = runtime_over(dir.path(), true);
    let t = run(
        &rt,
        &format!(
            "select id, ok from (jsonapi url:'{base}/items?q={{key}}' records:'items[*]' attrs:'id,ok' key:'a b')"
        ),
    )
    .unwrap();
    assert_eq!(t.len(), 3);
    assert_eq!(t.cell(0, "ok"), Some("true"));
    assert_eq!(t.cell(2, "ok"), None);
    assert_eq!(seen.lock().unwrap().len(), 1);

    let err = run(
        &rt,
        &format!("select id from (jsonapi url:'{base}/broken' records:'items[*]' attrs:'id')"),
    )
    .unwrap_err();
    let VsqlError::Source(e) = &err else {
        panic!("{err}")
    };
    assert_eq!(e.kind, SourceErrorKind::Fetch);
    assert_eq!(e.operator, "jsonapi");
    assert!(e.message.contains("503"), "{e}");
}

#[test]
fn replayed_status_files_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let url = "https://api.example.org/v1/x";
    let key = vweave_core::vtable::replay_key(url);
    std::fs::write(dir.path().join(format!("{key}.body")), "{}").unwrap();
    std::fs::write(dir.path().join(format!("{key}.status")), "429").unwrap();
    let rt = VTableRuntime::new(
        Registry::standard(&StandardOptions::default()),
        Arc::new(WebFetcher::new(dir.path()).with_replay_dir(dir.path())),
        Arc::new(ManualClock::new(0)),
        RuntimeConfig::default(),
    );
    let err = run(
        &rt,
        &format!("select id from (jsonapi url:'{url}' records:'items[*]' attrs:'id')"),
    )
    .unwrap_err();
    assert!(err.to_string().contains("429"), "{err}");
    let missing = run(
        &rt,
        "select id from (jsonapi url:'https://api.example.org/v1/y' records:'items[*]' attrs:'id')",
    )
    .unwrap_err();
    assert!(
        missing.to_string().contains("no recorded response"),
        "{missing}"
    );
}
