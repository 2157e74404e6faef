//! Tokens reach the upstream request but never the logs.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::process::Command;
use std::sync::{Arc, Mutex};

const TOKEN: &str = "tok-7f3a9c1e-very-secret";

/// Answers every request with `status` and a fixed body; keeps request heads.
fn mock(status: u16) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                head.push_str(&line);
            }
            log.lock().unwrap().push(head);
            let body = r#"{"items":[{"id":"a1","name":"Alpha"}]}"#;
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (format!("http://{addr}"), seen)
}

fn run_with_token(base: &str, level: &str) -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("m.obda"),
        format!(
            "[PrefixDeclaration]\nex: http://example.org/\n[MappingDeclaration] @collection [[\n\
             mappingId items\ntarget ex:{{id}} ex:name {{name}} .\n\
             source select id, name from (jsonapi url:'{base}/items' records:'items[*]' attrs:'id,name' token_env:VWEAVE_YELP_TOKEN)\n]]\n"
        ),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("vweave.conf"),
        "mappings: m.obda\nlive: true\nrecord: true\nreplay: rec\n",
    )
    .unwrap();
    std::fs::create_dir(dir.path().join("rec")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vweave"))
        .args([
            "--log-level",
            level,
            "query",
            "-c",
            dir.path().join("vweave.conf").to_str().unwrap(),
            "-e",
            "SELECT ?s ?n WHERE { ?s <http://example.org/name> ?n }",
        ])
        .env("VWEAVE_YELP_TOKEN", TOKEN)
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    let mut text = String::from_utf8_lossy(&out.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&out.stderr));
    for entry in std::fs::read_dir(dir.path().join("rec")).unwrap() {
        text.push_str(&std::fs::read_to_string(entry.unwrap().path()).unwrap());
    }
    (out.status.success(), text)
}

#[test]
fn token_is_sent_but_never_logged() {
    for level in ["trace", "debug", "info"] {
        let (base, seen) = mock(200);
        let (ok, text) = run_with_token(&base, level);
        assert!(ok, "{text}");
        assert!(text.contains("Alpha"));
        assert!(!text.contains(TOKEN), "token leaked at {level}");
        let heads = seen.lock().unwrap();
        assert_eq!(heads.len(), 1);
        assert!(
            heads[0].to_ascii_lowercase().contains(&format!(
                "authorization: bearer {}",
                TOKEN.to_ascii_lowercase()
            )),
            "{}",
            heads[0]
        );
    }
}

#[test]
fn token_stays_out_of_error_reports() {
    let (base, _) = mock(401);
    let (ok, text) = run_with_token(&base, "trace");
    assert!(!ok);
    assert!(text.contains("401"), "{text}");
    assert!(!text.contains(TOKEN));
}
