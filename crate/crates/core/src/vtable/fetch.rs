use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;
use std::time::Duration;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// A credential. Never printed.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn from_env(var: &str) -> Option<Self> {
        std::env::var(var).ok().filter(|v| !v.is_empty()).map(Self)
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("***")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Response {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("cannot read {path}: {message}")]
    File { path: String, message: String },
    #[error("no recorded response for {url} and live mode is off")]
    NotRecorded { url: String },
    #[error("request to {url} failed: {message}")]
    Http { url: String, message: String },
    #[error("unsupported URL {0:?}")]
    Unsupported(String),
}

/// Retrieves documents for operators.
pub trait Fetcher: Send + Sync {
    fn get(&self, url: &str, auth: Option<&Secret>) -> Result<Response, FetchError>;

    /// Number of `get` calls made so far.
    fn calls(&self) -> u64;
}

/// File name stem of a recorded response: hex SHA-256 of the request URL.
pub fn replay_key(url: &str) -> String {
    hex::encode(Sha256::digest(url.as_bytes()))
}

/// Serves `file:` URLs from disk, HTTP(S) URLs from a replay directory of
/// `<replay_key>.body` files (optional `<replay_key>.status`), and, when
/// live mode is on, from the network.
pub struct WebFetcher {
    base_dir: PathBuf,
    replay_dir: Option<PathBuf>,
    live: bool,
    record: bool,
    timeout: Duration,
    client: OnceLock<reqwest::blocking::Client>,
    calls: AtomicU64,
}

impl fmt::Debug for WebFetcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WebFetcher")
            .field("base_dir", &self.base_dir)
            .field("replay_dir", &self.replay_dir)
            .field("live", &self.live)
            .field("record", &self.record)
            .finish()
    }
}

impl WebFetcher {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        Self {
            base_dir: base_dir.into(),
            replay_dir: None,
            live: false,
            record: false,
            timeout: Duration::from_secs(30),
            client: OnceLock::new(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_replay_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.replay_dir = Some(dir.into());
        self
    }

    pub fn with_live(mut self, live: bool) -> Self {
        self.live = live;
        self
    }

    /// Live responses are written to the replay directory.
    pub fn with_recording(mut self, record: bool) -> Self {
        self.record = record;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    fn file_path(&self, rest: &str) -> PathBuf {
        let path = rest.strip_prefix("//").unwrap_or(rest);
        let path = Path::new(path);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    fn replayed(&self, url: &str) -> Result<Option<Response>, FetchError> {
        let Some(dir) = &self.replay_dir else {
            return Ok(None);
        };
        let key = replay_key(url);
        let body_path = dir.join(format!("{key}.body"));
        let body = match fs::read(&body_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(FetchError::File {
                    path: body_path.display().to_string(),
                    message: e.to_string(),
                })
            }
        };
        let status = fs::read_to_string(dir.join(format!("{key}.status")))
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(200);
        Ok(Some(Response { status, body }))
    }

    fn live_get(&self, url: &str, auth: Option<&Secret>) -> Result<Response, FetchError> {
        let http = |message: String| FetchError::Http {
            url: url.to_string(),
            message,
        };
        let client = match self.client.get() {
            Some(c) => c,
            None => {
                let c = reqwest::blocking::Client::builder()
                    .timeout(self.timeout)
                    .build()
                    .map_err(|e| http(e.to_string()))?;
                self.client.get_or_init(|| c)
            }
        };
        let mut req = client.get(url);
        if let Some(token) = auth {
            req = req.bearer_auth(token.expose());
        }
        let resp = req.send().map_err(|e| http(e.without_url().to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .bytes()
            .map_err(|e| http(e.without_url().to_string()))?;
        Ok(Response {
            status,
            body: body.to_vec(),
        })
    }

    fn store(&self, url: &str, resp: &Response) {
        let Some(dir) = &self.replay_dir else {
            return;
        };
        let key = replay_key(url);
        let res = fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join(format!("{key}.body")), &resp.body))
            .and_then(|_| {
                if resp.status == 200 {
                    Ok(())
                } else {
                    fs::write(dir.join(format!("{key}.status")), resp.status.to_string())
                }
            });
        if let Err(e) = res {
            tracing::warn!(%url, error = %e, "could not record response");
        }
    }
}

impl Fetcher for WebFetcher {
    fn get(&self, url: &str, auth: Option<&Secret>) -> Result<Response, FetchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(rest) = url.strip_prefix("file:") {
            let path = self.file_path(rest);
            tracing::debug!(path = %path.display(), "reading fixture");
            let body = fs::read(&path).map_err(|e| FetchError::File {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            return Ok(Response { status: 200, body });
        }
        if !(url.starts_with("http://") || url.starts_with("https://")) {
            return Err(FetchError::Unsupported(url.to_string()));
        }
        if !self.record {
            if let Some(resp) = self.replayed(url)? {
                tracing::debug!(%url, status = resp.status, "replayed response");
                return Ok(resp);
            }
        }
        if !self.live {
            return Err(FetchError::NotRecorded {
                url: url.to_string(),
            });
        }
        tracing::debug!(%url, authenticated = auth.is_some(), "live request");
        let resp = self.live_get(url, auth)?;
        if self.record {
            self.store(url, &resp);
        }
        Ok(resp)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secrets_are_redacted() {
        let s = Secret::new("hunter2");
        assert_eq!(format!("{s} {s:?}"), "*** Secret(***)");
        assert_eq!(s.expose(), "hunter2");
    }

    #[test]
    fn file_and_replay_sources() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.html"), "<table></table>").unwrap();
        let replay = dir.path().join("replay");
        fs::create_dir(&replay).unwrap();
        let url = "https://api.example.org/x?q=1";
        fs::write(replay.join(format!("{}.body", replay_key(url))), "{}").unwrap();
        fs::write(replay.join(format!("{}.status", replay_key(url))), "503\n").unwrap();

        let f = WebFetcher::new(dir.path()).with_replay_dir(&replay);
        assert_eq!(
            f.get("file:a.html", None).unwrap().text(),
            "<table></table>"
        );
        let abs = format!("file://{}", dir.path().join("a.html").display());
        assert!(f.get(&abs, None).is_ok());
        let r = f.get(url, None).unwrap();
        assert_eq!((r.status, r.text().as_str()), (503, "{}"));
        assert!(matches!(
            f.get("https://api.example.org/other", None),
            Err(FetchError::NotRecorded { .. })
        ));
        assert!(f.get("file:missing.html", None).is_err());
        assert!(f.get("gopher://x", None).is_err());
        assert_eq!(f.calls(), 6);
    }

    #[test]
    fn replay_key_is_sha256_hex() {
        assert_eq!(
            replay_key("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
