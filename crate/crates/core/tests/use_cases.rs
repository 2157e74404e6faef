mod common;

use std::collections::BTreeSet;

use common::*;
use vweave_core::engine::PlanNode;
use vweave_core::rdf::{Literal, Term, Variable, XSD};
use vweave_core::sparql::parse_sparql;
use vweave_core::vtable::replay_key;

fn var(n: &str) -> Variable {
    Variable::new(n).unwrap()
}

fn cell_texts(table_html: &str, tag: &str) -> Vec<Vec<String>> {
    let strip = |s: &str| {
        let mut out = String::new();
        let mut depth = 0;
        for c in s.chars() {
            match c {
                '<' => depth += 1,
                '>' => depth -= 1,
                c if depth == 0 => out.push(c),
                _ => {}
            }
        }
        out.split_whitespace().collect::<Vec<_>>().join(" ")
    };
    table_html
        .split("<tr>")
        .skip(1)
        .map(|row| {
            row.split(&format!("<{tag}"))
                .skip(1)
                .map(|c| strip(&format!("<{c}").replace(&format!("</{tag}>"), "")))
                .collect()
        })
        .filter(|r: &Vec<String>| !r.is_empty())
        .collect()
}

fn nth_table(html: &str, n: usize) -> String {
    html.split("<table")
        .nth(n)
        .unwrap()
        .split("</table>")
        .next()
        .unwrap()
        .to_string()
}

fn replay_body(fixture: &str, url: &str) -> String {
    read_fixture(fixture, &format!("replay/{}.body", replay_key(url)))
}

#[test]
fn movie_join_returns_the_overlapping_titles_with_both_ranks() {
    // expected answer read off the raw pages by plain string scanning
    let rt = nth_table(
        &replay_body("movies", "http://www.rottentomatoes.com/top/bestofrt/"),
        3,
    );
    let rt_titles: Vec<String> = cell_texts(&rt, "td").iter().map(|r| r[2].clone()).collect();
    let wiki = nth_table(
        &replay_body(
            "movies",
            "http://en.wikipedia.org/wiki/AFI%27s_100_Years...100_Movies",
        ),
        2,
    );
    let mut expected = BTreeSet::new();
    for row in cell_texts(&wiki, "td") {
        let title = format!("{} ({})", row[0], row[1]);
        if let Some(pos) = rt_titles.iter().position(|t| t == &title) {
            expected.insert((title, (pos + 1).to_string(), row[2].clone()));
        }
    }
    assert_eq!(expected.len(), 3);

    let fx = fixture_engine("movies", None);
    let ans = fx
        .engine
        .answer(&read_fixture("movies", "query.rq"))
        .unwrap();
    let got: BTreeSet<(String, String, String)> = ans
        .solutions
        .iter()
        .map(|mu| {
            let v = |n: &str| mu.get(&var(n)).unwrap().value().to_string();
            (v("title"), v("rrank"), v("wrank"))
        })
        .collect();
    assert_eq!(ans.solutions.len(), 3);
    assert_eq!(got, expected);
    assert_eq!(ans.fetches, 2);
}

#[test]
fn movie_plan_joins_two_views_on_the_title() {
    let fx = fixture_engine("movies", None);
    let q = parse_sparql(&read_fixture("movies", "query.rq")).unwrap();
    let plan = fx.engine.unfold(&q);
    let PlanNode::Bgp(bgp) = &plan.root else {
        panic!("{plan:?}")
    };
    assert_eq!(bgp.branches.len(), 1);
    let axioms: BTreeSet<usize> = bgp.branches[0].atoms.iter().map(|a| a.axiom).collect();
    assert_eq!(axioms.len(), 2);
    let text = fx.engine.render_plan(&plan);
    assert!(text.contains("QVIEW1.Title = QVIEW2.Title"), "{text}");
}

fn tweets() -> Vec<(String, String)> {
    let body = replay_body(
        "twitter",
        "https://api.twitter.com/1.1/search/tweets.json?q=edbt2020",
    );
    let doc: serde_json::Value = serde_json::from_str(&body).unwrap();
    doc["statuses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            (
                s["user"]["screen_name"].as_str().unwrap().to_string(),
                s["text"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn positive_tweets_with_classifier_running() {
    let lex = lexicon();
    let expected: BTreeSet<String> = tweets()
        .into_iter()
        .filter(|(_, text)| classify(text, &lex) == "positive")
        .map(|(user, _)| format!("http://twitter.com/{user}"))
        .collect();
    assert_eq!(expected.len(), 4);

    let fx = fixture_engine("twitter", Some(spawn_sentiment_server()));
    let ans = fx
        .engine
        .answer(&read_fixture("twitter", "query.rq"))
        .unwrap();
    let got: BTreeSet<String> = ans
        .solutions
        .iter()
        .map(|mu| mu.get(&var("s")).unwrap().as_iri().unwrap().to_string())
        .collect();
    assert_eq!(got, expected);
    assert_eq!(ans.solutions.len(), 4);
}

#[test]
fn positive_tweets_with_classifier_down() {
    let fx = fixture_engine("twitter", Some(dead_address()));
    let ans = fx
        .engine
        .answer(&read_fixture("twitter", "query.rq"))
        .unwrap();
    assert!(ans.solutions.is_empty());
    assert!(fx.runtime.stats().warnings > 0);
}

#[test]
fn twitter_plan_has_two_views_and_the_sentiment_filter() {
    let fx = fixture_engine("twitter", None);
    let q = parse_sparql(&read_fixture("twitter", "query.rq")).unwrap();
    let plan = fx.engine.unfold(&q);
    assert_eq!(plan.branch_count(), 1);
    let PlanNode::Bgp(bgp) = &plan.root else {
        panic!()
    };
    let atoms = &bgp.branches[0].atoms;
    assert_eq!(atoms.len(), 2);
    assert_eq!(atoms[0].axiom, atoms[1].axiom);
    assert_eq!(atoms[1].filters[0].column, "sentiment");
    assert_eq!(atoms[1].filters[0].value, "positive");
    let text = fx.engine.render_plan(&plan);
    assert!(text.contains("QVIEW1.username = QVIEW2.username"), "{text}");
    assert!(text.contains("QVIEW2.sentiment = 'positive'"), "{text}");
    assert!(text.starts_with("SELECT DISTINCT s"), "{text}");
}

#[test]
fn both_views_share_one_fetch() {
    let fx = fixture_engine("twitter", Some(dead_address()));
    let ans = fx
        .engine
        .answer(&read_fixture("twitter", "query.rq"))
        .unwrap();
    assert_eq!(ans.fetches, 1);
    assert_eq!(fx.runtime.stats().api_calls, 1);
}

fn venues() -> Vec<serde_json::Value> {
    let body = replay_body(
        "foursquare",
        "https://api.foursquare.com/v2/venues/search?query=coffee&near=Chicago",
    );
    let doc: serde_json::Value = serde_json::from_str(&body).unwrap();
    doc["response"]["venues"].as_array().unwrap().clone()
}

#[test]
fn coffee_venues_by_category_iri() {
    let expected: BTreeSet<(String, String)> = venues()
        .iter()
        .filter(|v| v["categories"][0]["name"] == "Coffee")
        .map(|v| {
            (
                format!("http://foursquare.com/{}", v["id"].as_str().unwrap()),
                v["hereNow"]["count"].to_string(),
            )
        })
        .collect();
    let fx = fixture_engine("foursquare", None);
    let ans = fx
        .engine
        .answer(&read_fixture("foursquare", "query-category-iri.rq"))
        .unwrap();
    let got: BTreeSet<(String, String)> = ans
        .solutions
        .iter()
        .map(|mu| {
            let c = mu.get(&var("checkins")).unwrap();
            assert_eq!(
                c,
                &Term::Literal(Literal::typed(c.value(), format!("{XSD}integer")).unwrap())
            );
            (
                mu.get(&var("venue")).unwrap().value().to_string(),
                c.value().to_string(),
            )
        })
        .collect();
    assert_eq!(got, expected);
    assert_eq!(got.len(), 3);
}

#[test]
fn category_as_plain_literal_matches_nothing() {
    let fx = fixture_engine("foursquare", None);
    let ans = fx
        .engine
        .answer(&read_fixture("foursquare", "query.rq"))
        .unwrap();
    assert!(ans.solutions.is_empty());
    assert!(ans
        .warnings
        .iter()
        .any(|w| w.contains("matches no mapping target")));
    assert_eq!(ans.fetches, 0);
}

#[test]
fn unknown_predicate_gives_empty_plan_and_warning() {
    let fx = fixture_engine("yelp", None);
    let ans = fx
        .engine
        .answer("SELECT ?s WHERE { ?s <http://example.org/nowhere> ?o }")
        .unwrap();
    assert_eq!(ans.plan.branch_count(), 0);
    assert!(ans.solutions.is_empty());
    assert_eq!(ans.warnings.len(), 1);
}

#[test]
fn yelp_queries_use_one_call() {
    let body = replay_body(
        "yelp",
        "https://api.yelp.com/v3/businesses/search?term=Burgers&location=Chicago",
    );
    let doc: serde_json::Value = serde_json::from_str(&body).unwrap();
    let expected: BTreeSet<(String, String)> = doc["businesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| {
            (
                b["id"].as_str().unwrap().to_string(),
                b["name"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    for q in ["q1.rq", "q2.rq"] {
        let fx = fixture_engine("yelp", None);
        let ans = fx.engine.answer(&read_fixture("yelp", q)).unwrap();
        let got: BTreeSet<(String, String)> = ans
            .solutions
            .iter()
            .map(|mu| {
                (
                    mu.get(&var("id")).unwrap().value().to_string(),
                    mu.get(&var("name")).unwrap().value().to_string(),
                )
            })
            .collect();
        assert_eq!(got, expected, "{q}");
        assert_eq!(ans.solutions.len(), 20, "{q}");
        assert_eq!(fx.runtime.stats().api_calls, 1, "{q}");
    }
}

#[test]
fn warm_run_fetches_nothing() {
    let fx = fixture_engine("yelp", None);
    let q = read_fixture("yelp", "q2.rq");
    assert_eq!(fx.engine.answer(&q).unwrap().fetches, 1);
    fx.clock.advance(1_000);
    let warm = fx.engine.answer(&q).unwrap();
    assert_eq!(warm.fetches, 0);
    assert_eq!(warm.solutions.len(), 20);
    assert_eq!(fx.runtime.stats().api_calls, 1);
    let cold = fx
        .engine
        .answer_with(&q, vweave_core::QueryOptions { no_cache: true })
        .unwrap();
    assert_eq!(cold.fetches, 1);
}

#[test]
fn malformed_query_is_a_client_error() {
    let fx = fixture_engine("yelp", None);
    let err = fx.engine.answer("SELECT").unwrap_err();
    assert!(err.is_client());
    assert!(err.to_string().contains("syntax error"), "{err}");
}

#[test]
fn missing_recording_is_an_upstream_error() {
    let fx = fixture_engine("yelp", None);
    let engine = vweave_core::Engine::from_mappings(
        &read_fixture("yelp", "mappings.obda").replace("near:Chicago", "near:Boston"),
        fx.runtime.clone(),
    )
    .unwrap();
    let err = engine.answer(&read_fixture("yelp", "q1.rq")).unwrap_err();
    assert!(err.is_upstream(), "{err}");
    assert!(err.to_string().contains("yelp("), "{err}");
}
