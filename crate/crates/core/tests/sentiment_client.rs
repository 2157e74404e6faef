mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::Ordering;

use proptest::prelude::*;

use common::*;
use vweave_core::vtable::{process_attribute, AttributeProcessorSpec, Lexicon};

fn shipped() -> Lexicon {
    Lexicon::parse(&read_fixture("twitter", "lexicon.txt")).unwrap()
}

#[test]
fn shipped_lexicon_matches_the_reference_reader() {
    let (pos, neg) = lexicon();
    let lex = shipped();
    assert_eq!(lex.positive(), &pos);
    assert_eq!(lex.negative(), &neg);
    assert!(lex.positive().is_disjoint(lex.negative()));
}

proptest! {
    #[test]
    fn classification_matches_the_reference(
        words in prop::collection::vec(
            prop::sample::select(vec!["love", "Great", "bad", "boring", "talk", "the", "HATE", "nice"]),
            0..12,
        ),
        seps in prop::collection::vec(prop::sample::select(vec![" ", ", ", "!", "\n", "-"]), 12),
    ) {
        let text: String = words.iter().zip(&seps).map(|(w, s)| format!("{w}{s}")).collect();
        prop_assert_eq!(shipped().classify(&text), classify(&text, &lexicon()));
    }
}

#[test]
fn hundred_pipelined_requests_share_one_connection() {
    let (addr, connections) = spawn_classifier(shipped());
    let spec = AttributeProcessorSpec::sentiment("text", Some(addr), 2_000);
    let texts: Vec<String> = (0..100)
        .map(|i| {
            if i % 3 == 0 {
                format!("love\nthis {i}")
            } else {
                format!("boring {i}")
            }
        })
        .collect();
    let inputs: Vec<Option<&str>> = texts.iter().map(|t| Some(t.as_str())).collect();
    let out = spec.process_all(&inputs);
    assert_eq!(out.failures, 0);
    assert_eq!(out.values.len(), 100);
    for (t, v) in texts.iter().zip(&out.values) {
        assert_eq!(v[0].as_deref(), Some(classify(t, &lexicon())));
    }
    assert_eq!(connections.load(Ordering::SeqCst), 1);
}

#[test]
fn embedded_newlines_travel_as_one_line() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let server = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut w = stream;
        let mut lines = Vec::new();
        for _ in 0..2 {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            writeln!(w, "negative").unwrap();
            lines.push(line);
        }
        lines
    });
    let spec = AttributeProcessorSpec::sentiment("text", Some(addr), 2_000);
    let out = spec.process_all(&[Some("a\nb\r\nc"), Some("x\\ny")]);
    assert_eq!(out.failures, 0);
    let lines = server.join().unwrap();
    assert_eq!(lines, ["a\\nb\\r\\nc\n", "x\\\\ny\n"]);
}

#[test]
fn unreachable_classifier_yields_null_and_counts_failures() {
    let spec = AttributeProcessorSpec::sentiment("text", Some(dead_address()), 300);
    let (pairs, failures) = process_attribute(&spec, "I love this great conference");
    assert_eq!(pairs[0].1.as_deref(), Some("I love this great conference"));
    assert_eq!(pairs[1], ("sentiment".to_string(), None));
    assert_eq!(failures, 1);
}

#[test]
fn reachable_classifier_labels_the_conference_tweet() {
    let (addr, _) = spawn_classifier(shipped());
    let spec = AttributeProcessorSpec::sentiment("text", Some(addr), 2_000);
    let (pairs, failures) = process_attribute(&spec, "I love this great conference");
    assert_eq!(pairs[1].1.as_deref(), Some("positive"));
    assert_eq!(failures, 0);
}

#[test]
fn server_dropping_mid_stream_fails_the_rest() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut w = stream;
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        writeln!(w, "positive").unwrap();
    });
    let spec = AttributeProcessorSpec::sentiment("text", Some(addr), 1_000);
    let out = spec.process_all(&[Some("a"), Some("b"), Some("c")]);
    assert_eq!(out.values[0][0].as_deref(), Some("positive"));
    assert_eq!(out.values[1][0], None);
    assert_eq!(out.values[2][0], None);
    assert_eq!(out.failures, 2);
}
