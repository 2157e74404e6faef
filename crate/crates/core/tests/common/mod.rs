#![allow(dead_code)]

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use vweave_core::rdf::{canonical_multiset, SolutionMapping};
use vweave_core::vtable::operators::StandardOptions;
use vweave_core::vtable::{
    unescape_line, Lexicon, ManualClock, Registry, RuntimeConfig, VTableRuntime, WebFetcher,
};
use vweave_core::Engine;

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn read_fixture(name: &str, file: &str) -> String {
    std::fs::read_to_string(fixture_dir(name).join(file)).expect("fixture file")
}

pub struct Fixture {
    pub engine: Engine,
    pub runtime: Arc<VTableRuntime>,
    pub clock: Arc<ManualClock>,
}

/// Engine over `fixtures/<name>` with replayed responses and a manual clock at 0.
pub fn fixture_engine(name: &str, sentiment: Option<String>) -> Fixture {
    let dir = fixture_dir(name);
    let fetcher = WebFetcher::new(&dir).with_replay_dir(dir.join("replay"));
    let clock = Arc::new(ManualClock::new(0));
    let registry = Registry::standard(&StandardOptions {
        sentiment_address: sentiment,
        sentiment_timeout_ms: 2_000,
    });
    let runtime = Arc::new(VTableRuntime::new(
        registry,
        Arc::new(fetcher),
        clock.clone(),
        RuntimeConfig::default(),
    ));
    let engine = Engine::from_mappings(&read_fixture(name, "mappings.obda"), runtime.clone())
        .expect("fixture mappings are valid");
    Fixture {
        engine,
        runtime,
        clock,
    }
}

/// The shipped lexicon as (positive, negative) word sets.
pub fn lexicon() -> (HashSet<String>, HashSet<String>) {
    let text = read_fixture("twitter", "lexicon.txt");
    let (mut pos, mut neg) = (HashSet::new(), HashSet::new());
    let mut section = None;
    for line in text.lines().map(str::trim) {
        match line {
            "" => {}
            l if l.starts_with('#') => {}
            "+" => section = Some(true),
            "-" => section = Some(false),
            w => match section {
                Some(true) => {
                    pos.insert(w.to_lowercase());
                }
                Some(false) => {
                    neg.insert(w.to_lowercase());
                }
                None => panic!("word before section marker"),
            },
        }
    }
    (pos, neg)
}

pub fn classify(text: &str, lex: &(HashSet<String>, HashSet<String>)) -> &'static str {
    let mut score = 0i64;
    for tok in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        let tok = tok.to_lowercase();
        if lex.0.contains(&tok) {
            score += 1;
        }
        if lex.1.contains(&tok) {
            score -= 1;
        }
    }
    if score > 0 {
        "positive"
    } else {
        "negative"
    }
}

/// A line-protocol classifier over the shipped lexicon on an ephemeral port,
/// serving connections until the process exits. Returns its `host:port`.
pub fn spawn_sentiment_server() -> String {
    spawn_classifier(Lexicon::parse(&read_fixture("twitter", "lexicon.txt")).unwrap()).0
}

/// Like [`spawn_sentiment_server`] with a given lexicon; also returns the
/// number of connections accepted so far.
pub fn spawn_classifier(lexicon: Lexicon) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let lex = Arc::new(lexicon);
    let connections = Arc::new(AtomicUsize::new(0));
    let counter = connections.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            counter.fetch_add(1, Ordering::SeqCst);
            let lex = lex.clone();
            std::thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                for line in BufReader::new(stream).lines() {
                    let Ok(line) = line else { break };
                    let reply = format!("{}\n", lex.classify(&unescape_line(&line)));
                    if writer.write_all(reply.as_bytes()).is_err() {
                        break;
                    }
                }
            });
        }
    });
    (addr, connections)
}

/// An address nothing listens on.
pub fn dead_address() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = l.local_addr().unwrap().to_string();
    drop(l);
    addr
}

pub fn same_multiset(a: &[SolutionMapping], b: &[SolutionMapping]) -> bool {
    canonical_multiset(a) == canonical_multiset(b)
}

/// Requests seen by a [`spawn_http`] server: request line plus headers.
pub type Seen = Arc<std::sync::Mutex<Vec<String>>>;

/// A minimal HTTP/1.1 server answering `GET path` from `routes`
/// (path, status, body) and 404 otherwise. Returns its base URL.
pub fn spawn_http(routes: Vec<(&'static str, u16, String)>) -> (String, Seen) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let seen: Seen = Arc::default();
    let log = seen.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                head.push_str(&line);
            }
            let path = head.split_whitespace().nth(1).unwrap_or("/").to_string();
            log.lock().unwrap().push(head);
            let (status, body) = routes
                .iter()
                .find(|(p, _, _)| *p == path)
                .map(|(_, s, b)| (*s, b.clone()))
                .unwrap_or((404, "not found".into()));
            let mut out = stream;
            let _ = write!(
                out,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (base, seen)
}
