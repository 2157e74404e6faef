//! A model of SERVICE-to-API style federation, used as a baseline. Stored
//! triples are evaluated first; every distinct instantiation of the service
//! URL is one API call, and values pulled out of each JSON response by path
//! become solution mappings. This is a behavioural model of such systems for
//! comparison purposes, not an implementation of any of them.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde_json::Value;
use serde_json_path::JsonPath;
use vweave_core::rdf::{
    evaluate_pattern, GraphPattern, RdfGraph, SolutionMapping, Term, TermPattern, Triple,
    TriplePattern, Variable,
};
use vweave_core::vtable::operators::StandardOptions;
use vweave_core::vtable::{
    FetchError, Fetcher, Registry, Response, RuntimeConfig, Secret, SystemClock, VTableRuntime,
    WebFetcher,
};
use vweave_core::{parse_sparql, Engine, QueryOptions};

use crate::report::{median, BenchReport, BenchRow};
use crate::score::score;
use crate::BenchError;

const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const YELP: &str = "http://yelp.com/ontology#";
const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
const KB: &str = "http://example.org/kb/";

const BUSINESS_URL: &str = "https://api.yelp.com/v3/businesses/{id}";
const SEARCH_URL: &str = "https://api.yelp.com/v3/businesses/search?term=Burgers&location={l}";

/// The rating-aware Yelp query: names, ratings and ids of the same business.
pub const RATING_QUERY: &str = "PREFIX yelp: <http://yelp.com/ontology#>
select distinct ?id ?name ?rating
where { ?s yelp:name ?name .
 ?s yelp:rating ?rating .
 ?s yelp:hasID ?id }";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S2AMode {
    /// One call per stored binding; extracted values join with the binding.
    Joined,
    /// Extracted lists share no variable with the stored triples.
    Cartesian,
    /// A single constant binding and one call.
    BindOnly,
}

impl S2AMode {
    pub fn as_str(self) -> &'static str {
        match self {
            S2AMode::Joined => "joined",
            S2AMode::Cartesian => "cartesian",
            S2AMode::BindOnly => "bind-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub path: String,
    pub variable: Variable,
    pub datatype: Option<String>,
}

impl Extraction {
    pub fn new(path: &str, variable: &str, datatype: Option<&str>) -> Self {
        Self {
            path: path.to_string(),
            variable: Variable::new(variable).expect("valid variable name"),
            datatype: datatype.map(String::from),
        }
    }
}

#[derive(Debug, Clone)]
pub struct S2AQuerySpec {
    pub name: String,
    pub stored: RdfGraph,
    pub stored_patterns: Vec<TriplePattern>,
    pub bind: Option<(Variable, Term)>,
    /// Service URL with one `{var}` hole.
    pub url_template: String,
    pub extraction: Vec<Extraction>,
    /// The first `aligned` extraction lists are zipped position by position;
    /// each remaining list multiplies the result. Zero is treated as one.
    pub aligned: usize,
    pub projection: Vec<Variable>,
    pub mode: S2AMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S2AOutcome {
    /// Distinct projected solutions.
    pub solutions: Vec<SolutionMapping>,
    /// Distinct URLs requested.
    pub api_calls: u64,
}

impl S2AQuerySpec {
    fn invalid(&self, message: impl Into<String>) -> BenchError {
        BenchError::InvalidSpec {
            name: self.name.clone(),
            message: message.into(),
        }
    }

    /// The variable named by the URL hole.
    pub fn url_variable(&self) -> Result<Variable, BenchError> {
        let open = self.url_template.find('{');
        let close = self.url_template.find('}');
        let (Some(open), Some(close)) = (open, close) else {
            return Err(self.invalid("URL template has no {var} hole"));
        };
        if close < open || self.url_template[close + 1..].contains('{') {
            return Err(self.invalid("URL template must have exactly one hole"));
        }
        Variable::new(&self.url_template[open + 1..close])
            .map_err(|e| self.invalid(format!("URL hole: {e}")))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let url_var = self.url_variable()?;
        if self.extraction.is_empty() {
            return Err(self.invalid("no JSON extraction"));
        }
        if self.projection.is_empty() {
            return Err(self.invalid("empty projection"));
        }
        let stored: HashSet<Variable> = self
            .stored_patterns
            .iter()
            .flat_map(TriplePattern::variables)
            .collect();
        let shares_key = self.extraction.iter().any(|e| stored.contains(&e.variable));
        match self.mode {
            S2AMode::Joined | S2AMode::Cartesian if !stored.contains(&url_var) => Err(self
                .invalid(format!(
                    "?{} is not bound by the stored patterns",
                    url_var.name()
                ))),
            S2AMode::Joined if !shares_key => {
                Err(self.invalid("joined mode needs an extracted join key"))
            }
            S2AMode::Cartesian if shares_key => {
                Err(self.invalid("cartesian mode must not share variables with stored patterns"))
            }
            S2AMode::BindOnly => match &self.bind {
                Some((v, _)) if *v == url_var => Ok(()),
                Some(_) => Err(self.invalid("bind must target the URL variable")),
                None => Err(self.invalid("bind-only mode needs a bind")),
            },
            _ => Ok(()),
        }
    }
}

fn json_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        other => Some(other.to_string()),
    }
}

fn extract(
    spec: &S2AQuerySpec,
    url: &str,
    body: &Value,
) -> Result<Vec<SolutionMapping>, BenchError> {
    let mut lists = Vec::with_capacity(spec.extraction.len());
    for e in &spec.extraction {
        let path = JsonPath::parse(&e.path).map_err(|_| BenchError::BadPath(e.path.clone()))?;
        let mut terms = Vec::new();
        for v in path.query(body).all() {
            let Some(text) = json_text(v) else { continue };
            let term = match &e.datatype {
                Some(dt) => {
                    Term::typed_literal(text, dt.as_str()).map_err(|err| BenchError::BadJson {
                        url: url.to_string(),
                        message: err.to_string(),
                    })?
                }
                None => Term::literal(text),
            };
            terms.push(term);
        }
        lists.push((e.variable.clone(), terms));
    }

    let aligned = spec.aligned.clamp(1, lists.len());
    let zipped = lists[..aligned]
        .iter()
        .map(|(_, t)| t.len())
        .min()
        .unwrap_or(0);
    let mut rows: Vec<SolutionMapping> = (0..zipped)
        .filter_map(|j| {
            let mut mu = SolutionMapping::new();
            for (var, terms) in &lists[..aligned] {
                let single = SolutionMapping::from_pairs([(var.clone(), terms[j].clone())]);
                mu = mu.merge(&single)?;
            }
            Some(mu)
        })
        .collect();
    for (var, terms) in &lists[aligned..] {
        rows = rows
            .iter()
            .flat_map(|mu| {
                terms.iter().filter_map(move |t| {
                    mu.merge(&SolutionMapping::from_pairs([(var.clone(), t.clone())]))
                })
            })
            .collect();
    }
    Ok(rows)
}

/// Runs `spec` against `fetcher`. Identical URLs are requested once.
pub fn simulate_service_to_api(
    spec: &S2AQuerySpec,
    fetcher: &dyn Fetcher,
) -> Result<S2AOutcome, BenchError> {
    spec.validate()?;
    let url_var = spec.url_variable()?;
    let bindings = match (&spec.mode, &spec.bind) {
        (S2AMode::BindOnly, Some((v, t))) => {
            vec![SolutionMapping::from_pairs([(v.clone(), t.clone())])]
        }
        _ => evaluate_pattern(
            &GraphPattern::Bgp(spec.stored_patterns.clone()),
            &spec.stored,
        ),
    };
    let hole = format!("{{{}}}", url_var.name());
    let mut memo: HashMap<String, Vec<SolutionMapping>> = HashMap::new();
    let mut seen = HashSet::new();
    let mut solutions = Vec::new();
    for binding in bindings {
        let Some(value) = binding.get(&url_var) else {
            continue;
        };
        let url = spec.url_template.replace(&hole, value.value());
        if !memo.contains_key(&url) {
            let response = fetcher
                .get(&url, None)
                .map_err(|e| BenchError::MissingFixture {
                    url: url.clone(),
                    message: e.to_string(),
                })?;
            if !response.is_success() {
                return Err(BenchError::MissingFixture {
                    url,
                    message: format!("status {}", response.status),
                });
            }
            let json: Value =
                serde_json::from_slice(&response.body).map_err(|e| BenchError::BadJson {
                    url: url.clone(),
                    message: e.to_string(),
                })?;
            let rows = extract(spec, &url, &json)?;
            memo.insert(url.clone(), rows);
        }
        for row in &memo[&url] {
            if let Some(mu) = binding.merge(row) {
                let projected = mu.project(&spec.projection);
                if seen.insert(projected.clone()) {
                    solutions.push(projected);
                }
            }
        }
    }
    Ok(S2AOutcome {
        solutions,
        api_calls: memo.len() as u64,
    })
}

/// In-memory responses keyed by URL.
#[derive(Debug, Default)]
pub struct MapFetcher {
    bodies: HashMap<String, String>,
    calls: AtomicU64,
}

impl MapFetcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, url: &str, body: impl Into<String>) -> Self {
        self.bodies.insert(url.to_string(), body.into());
        self
    }
}

impl Fetcher for MapFetcher {
    fn get(&self, url: &str, _auth: Option<&Secret>) -> Result<Response, FetchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.bodies
            .get(url)
            .map(|b| Response {
                status: 200,
                body: b.clone().into_bytes(),
            })
            .ok_or_else(|| FetchError::NotRecorded {
                url: url.to_string(),
            })
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

fn var(name: &str) -> Variable {
    Variable::new(name).expect("valid variable name")
}

fn iri(s: &str) -> Term {
    Term::iri(s).expect("valid IRI")
}

fn triple(s: Term, p: &str, o: Term) -> Triple {
    Triple::new(s, iri(p), o).expect("valid triple")
}

fn pattern(s: &str, p: &str, o: &str) -> TriplePattern {
    let position = |x: &str| match x.strip_prefix('?') {
        Some(name) => TermPattern::Var(var(name)),
        None => TermPattern::Term(iri(x)),
    };
    TriplePattern::new(position(s), position(p), position(o)).expect("valid pattern")
}

/// The six Yelp comparison queries. `labels` are the business ids held in
/// the local store; `kb` supplies their ratings for the query that keeps
/// ratings locally.
pub fn yelp_suite(labels: &[String], kb: &RdfGraph) -> Vec<S2AQuerySpec> {
    let has_id = iri(&format!("{YELP}hasID"));
    let rating = iri(&format!("{YELP}rating"));
    let rating_of = |id: &str| -> Option<Term> {
        let subject = kb
            .iter()
            .find(|t| *t.predicate() == has_id && t.object().value() == id)?
            .subject()
            .clone();
        kb.iter()
            .find(|t| *t.subject() == subject && *t.predicate() == rating)
            .map(|t| t.object().clone())
    };

    let mut labelled = RdfGraph::new();
    let mut rated = RdfGraph::new();
    for (i, id) in labels.iter().enumerate() {
        let s = iri(&format!("{KB}b{i}"));
        labelled.insert(triple(s.clone(), RDFS_LABEL, Term::literal(id.as_str())));
        rated.insert(triple(s.clone(), RDFS_LABEL, Term::literal(id.as_str())));
        if let Some(r) = rating_of(id) {
            rated.insert(triple(s, &format!("{YELP}rating"), r));
        }
    }
    let mut city = RdfGraph::new();
    city.insert(triple(
        iri(&format!("{KB}city")),
        RDFS_LABEL,
        Term::literal("Chicago"),
    ));

    let id_name = vec![var("id"), var("name")];
    let id_name_rating = vec![var("id"), var("name"), var("rating")];
    let by_label = vec![pattern("?x", RDFS_LABEL, "?id")];
    let by_city = vec![pattern("?c", RDFS_LABEL, "?l")];
    let detail = |with_rating: bool| {
        let mut v = vec![
            Extraction::new("$.id", "id", None),
            Extraction::new("$.name", "name", None),
        ];
        if with_rating {
            v.push(Extraction::new("$.rating", "rating", Some(XSD_DECIMAL)));
        }
        v
    };
    let search = |with_rating: bool| {
        let mut v = vec![
            Extraction::new("$.businesses[*].id", "id", None),
            Extraction::new("$.businesses[*].name", "name", None),
        ];
        if with_rating {
            v.push(Extraction::new(
                "$.businesses[*].rating",
                "rating",
                Some(XSD_DECIMAL),
            ));
        }
        v
    };
    let spec = |name: &str,
                stored: &RdfGraph,
                patterns: &[TriplePattern],
                url: &str,
                extraction: Vec<Extraction>,
                aligned: usize,
                projection: &[Variable],
                mode: S2AMode| S2AQuerySpec {
        name: name.to_string(),
        stored: stored.clone(),
        stored_patterns: patterns.to_vec(),
        bind: None,
        url_template: url.to_string(),
        extraction,
        aligned,
        projection: projection.to_vec(),
        mode,
    };

    let mut rated_patterns = by_label.clone();
    rated_patterns.push(pattern("?x", &format!("{YELP}rating"), "?rating"));
    let mut q6 = spec(
        "Q6",
        &RdfGraph::new(),
        &[],
        SEARCH_URL,
        search(true),
        2,
        &id_name_rating,
        S2AMode::BindOnly,
    );
    q6.bind = Some((var("l"), Term::literal("Chicago")));
    vec![
        spec(
            "Q1",
            &labelled,
            &by_label,
            BUSINESS_URL,
            detail(false),
            2,
            &id_name,
            S2AMode::Joined,
        ),
        spec(
            "Q2",
            &city,
            &by_city,
            SEARCH_URL,
            search(false),
            1,
            &id_name,
            S2AMode::Cartesian,
        ),
        spec(
            "Q3",
            &labelled,
            &by_label,
            BUSINESS_URL,
            detail(true),
            3,
            &id_name_rating,
            S2AMode::Joined,
        ),
        spec(
            "Q4",
            &rated,
            &rated_patterns,
            BUSINESS_URL,
            detail(false),
            2,
            &id_name_rating,
            S2AMode::Joined,
        ),
        spec(
            "Q5",
            &city,
            &by_city,
            SEARCH_URL,
            search(true),
            2,
            &id_name_rating,
            S2AMode::Cartesian,
        ),
        q6,
    ]
}

/// The standard query each comparison query is scored against.
pub fn reference_query(name: &str, plain_query: &str) -> String {
    match name {
        "Q1" | "Q2" => plain_query.to_string(),
        _ => RATING_QUERY.to_string(),
    }
}

fn yelp_engine(dir: &Path) -> Result<Engine, BenchError> {
    let fetcher = WebFetcher::new(dir).with_replay_dir(dir.join("replay"));
    let runtime = Arc::new(VTableRuntime::new(
        Registry::standard(&StandardOptions::default()),
        Arc::new(fetcher),
        Arc::new(SystemClock),
        RuntimeConfig::default(),
    ));
    let mappings = std::fs::read_to_string(dir.join("mappings.obda"))?;
    Ok(Engine::from_mappings(&mappings, runtime)?)
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Runs the six queries on vweave and on the baseline model over the Yelp
/// fixture directory (`mappings.obda`, `q1.rq`, `labels.json`, `replay/`).
/// Each run is timed `repeats` times and reported as the median.
pub fn run_s2a(yelp_dir: &Path, repeats: usize) -> Result<BenchReport, BenchError> {
    let repeats = repeats.max(1);
    let plain_query = std::fs::read_to_string(yelp_dir.join("q1.rq"))?;
    let labels: Vec<String> =
        serde_json::from_str(&std::fs::read_to_string(yelp_dir.join("labels.json"))?)?;
    let kb = yelp_engine(yelp_dir)?.materialize()?;
    let mut report = BenchReport::default();

    for spec in yelp_suite(&labels, &kb) {
        let text = reference_query(&spec.name, &plain_query);
        let query = parse_sparql(&text).map_err(vweave_core::EngineError::from)?;
        let truth = query.evaluate(&kb);

        let engine = yelp_engine(yelp_dir)?;
        let mut times = Vec::with_capacity(repeats);
        let mut answer = None;
        let mut calls = 0;
        for _ in 0..repeats {
            let before = engine.runtime().stats().api_calls;
            let start = Instant::now();
            let a = engine.answer_query(&query, QueryOptions { no_cache: true })?;
            times.push(elapsed_ms(start));
            calls = engine.runtime().stats().api_calls - before;
            answer = Some(a);
        }
        let answer = answer.expect("at least one run");
        let s = score(&answer.solutions, &truth);
        report.rows.push(BenchRow {
            query: spec.name.clone(),
            mode: "vweave".into(),
            size: labels.len(),
            wall_clock_ms: median(&mut times),
            fetch_count: answer.fetches,
            api_call_count: calls,
            result_count: s.returned,
            expected: s.expected,
            precision: Some(s.precision),
            recall: Some(s.recall),
            accuracy: Some(s.accuracy),
            f1: Some(s.f1),
            error: None,
        });

        let fetcher = WebFetcher::new(yelp_dir).with_replay_dir(yelp_dir.join("replay"));
        let mut times = Vec::with_capacity(repeats);
        let mut outcome = None;
        for _ in 0..repeats {
            let start = Instant::now();
            outcome = Some(simulate_service_to_api(&spec, &fetcher));
            times.push(elapsed_ms(start));
        }
        let mut row = BenchRow {
            query: spec.name.clone(),
            mode: format!("s2a-{}", spec.mode.as_str()),
            size: labels.len(),
            wall_clock_ms: median(&mut times),
            expected: truth.len(),
            ..BenchRow::default()
        };
        match outcome.expect("at least one run") {
            Ok(o) => {
                let s = score(&o.solutions, &truth);
                row.fetch_count = o.api_calls;
                row.api_call_count = o.api_calls;
                row.result_count = s.returned;
                row.precision = Some(s.precision);
                row.recall = Some(s.recall);
                row.accuracy = Some(s.accuracy);
                row.f1 = Some(s.f1);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        report.rows.push(row);
    }
    Ok(report)
}
