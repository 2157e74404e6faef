use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::{escape_line, SourceRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessorKind {
    Identity,
    /// A line-oriented TCP classifier: one request line in, one label line out.
    Microservice {
        address: Option<String>,
        timeout_ms: u64,
    },
}

/// Derives extra attributes from one input attribute of every record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeProcessorSpec {
    pub input: String,
    pub kind: ProcessorKind,
    /// Derived attribute names, appended after the input attribute.
    pub outputs: Vec<String>,
}

/// Outcome of a processor run: derived values plus the number of values
/// that could not be derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Processed {
    pub values: Vec<Vec<Option<String>>>,
    pub failures: usize,
}

const LABELS: [&str; 2] = ["positive", "negative"];

struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Connection {
    fn open(address: &str, timeout: Duration) -> std::io::Result<Self> {
        let addr = address.to_socket_addrs()?.next().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::NotFound, "address did not resolve")
        })?;
        let stream = TcpStream::connect_timeout(&addr, timeout)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    fn classify(&mut self, text: &str) -> std::io::Result<String> {
        let mut request = escape_line(text);
        request.push('\n');
        self.writer.write_all(request.as_bytes())?;
        self.writer.flush()?;
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(std::io::ErrorKind::UnexpectedEof.into());
        }
        Ok(line.trim().to_string())
    }
}

impl AttributeProcessorSpec {
    pub fn identity(input: &str) -> Self {
        Self {
            input: input.to_string(),
            kind: ProcessorKind::Identity,
            outputs: vec![],
        }
    }

    pub fn sentiment(input: &str, address: Option<String>, timeout_ms: u64) -> Self {
        Self {
            input: input.to_string(),
            kind: ProcessorKind::Microservice {
                address,
                timeout_ms,
            },
            outputs: vec!["sentiment".to_string()],
        }
    }

    /// Processes a batch of input values over a single connection. Values
    /// that cannot be classified (NULL input, unreachable service, timeout,
    /// unexpected reply) yield NULL outputs and count as failures.
    pub fn process_all(&self, inputs: &[Option<&str>]) -> Processed {
        match &self.kind {
            ProcessorKind::Identity => Processed {
                values: inputs.iter().map(|_| vec![]).collect(),
                failures: 0,
            },
            ProcessorKind::Microservice {
                address,
                timeout_ms,
            } => {
                let nulls = || vec![None; self.outputs.len()];
                let mut values = Vec::with_capacity(inputs.len());
                let mut failures = 0;
                let timeout = Duration::from_millis((*timeout_ms).max(1));
                let mut conn = match address.as_deref() {
                    Some(a) => match Connection::open(a, timeout) {
                        Ok(c) => Some(c),
                        Err(e) => {
                            tracing::warn!(address = a, error = %e, "attribute processor unreachable");
                            None
                        }
                    },
                    None => {
                        tracing::warn!(input = %self.input, "no attribute processor address configured");
                        None
                    }
                };
                for input in inputs {
                    let (Some(c), Some(text)) = (conn.as_mut(), input) else {
                        failures += 1;
                        values.push(nulls());
                        continue;
                    };
                    match c.classify(text) {
                        Ok(label) if LABELS.contains(&label.as_str()) => {
                            let mut out = nulls();
                            if let Some(first) = out.first_mut() {
                                *first = Some(label);
                            }
                            values.push(out);
                        }
                        Ok(label) => {
                            tracing::warn!(reply = %label, "unexpected attribute processor reply");
                            failures += 1;
                            values.push(nulls());
                        }
                        Err(e) => {
                            tracing::warn!(error = %e, "attribute processor failed");
                            failures += 1;
                            values.push(nulls());
                            conn = None;
                        }
                    }
                }
                Processed { values, failures }
            }
        }
    }
}

/// Single-value form: the input pair followed by the derived pairs.
pub fn process_attribute(
    spec: &AttributeProcessorSpec,
    value: &str,
) -> (Vec<(String, Option<String>)>, usize) {
    let processed = spec.process_all(&[Some(value)]);
    let mut out = vec![(spec.input.clone(), Some(value.to_string()))];
    let derived = processed.values.into_iter().next().unwrap_or_default();
    out.extend(spec.outputs.iter().cloned().zip(derived));
    (out, processed.failures)
}

/// Applies processors to a batch of records, inserting derived attributes
/// right after their input attribute. Returns the number of failures.
pub(crate) fn apply_processors(
    specs: &[AttributeProcessorSpec],
    records: &mut [SourceRecord],
) -> usize {
    let mut failures = 0;
    for spec in specs {
        if spec.outputs.is_empty() {
            continue;
        }
        let inputs: Vec<Option<String>> = records
            .iter()
            .map(|r| r.get(&spec.input).map(str::to_string))
            .collect();
        let refs: Vec<Option<&str>> = inputs.iter().map(|v| v.as_deref()).collect();
        let processed = spec.process_all(&refs);
        failures += processed.failures;
        for (record, derived) in records.iter_mut().zip(processed.values) {
            let at = record
                .attributes
                .iter()
                .position(|(n, _)| n == &spec.input)
                .map_or(record.attributes.len(), |i| i + 1);
            for (offset, pair) in spec.outputs.iter().cloned().zip(derived).enumerate() {
                record.attributes.insert(at + offset, pair);
            }
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::TcpListener;
    use std::thread;

    fn lexicon_server(replies: usize) -> (String, thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let handle = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut writer = stream;
            let mut seen = Vec::new();
            for _ in 0..replies {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 {
                    break;
                }
                let label = if line.contains("love") {
                    "positive"
                } else {
                    "negative"
                };
                writeln!(writer, "{label}").unwrap();
                seen.push(line);
            }
            seen
        });
        (addr, handle)
    }

    #[test]
    fn identity_keeps_the_pair() {
        let (out, failures) = process_attribute(&AttributeProcessorSpec::identity("text"), "hello");
        assert_eq!(out, vec![("text".to_string(), Some("hello".to_string()))]);
        assert_eq!(failures, 0);
    }

    #[test]
    fn microservice_appends_label() {
        let (addr, server) = lexicon_server(2);
        let spec = AttributeProcessorSpec::sentiment("text", Some(addr), 2000);
        let p = spec.process_all(&[Some("I love\nthis"), Some("meh")]);
        assert_eq!(
            p.values,
            vec![
                vec![Some("positive".to_string())],
                vec![Some("negative".to_string())]
            ]
        );
        assert_eq!(p.failures, 0);
        let lines = server.join().unwrap();
        assert_eq!(lines[0], "I love\\nthis\n");
    }

    #[test]
    fn unreachable_service_gives_null_and_failure() {
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let spec =
            AttributeProcessorSpec::sentiment("text", Some(format!("127.0.0.1:{port}")), 500);
        let (out, failures) = process_attribute(&spec, "I love this great conference");
        assert_eq!(out[1], ("sentiment".to_string(), None));
        assert_eq!(failures, 1);
        let unset = AttributeProcessorSpec::sentiment("text", None, 500);
        assert_eq!(unset.process_all(&[Some("a"), None]).failures, 2);
    }
}
