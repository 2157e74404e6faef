//! `key: value` configuration files. Blank lines and `#` comments are
//! ignored; relative paths are resolved against the file's directory.
//!
//! ```text
//! mappings: mappings.obda      # required
//! fixtures: .                  # base directory for file: URLs
//! replay: replay               # recorded HTTP responses
//! cache_dir: /tmp/vweave       # on-disk mirror of the operator cache
//! listen: 127.0.0.1:8080
//! log_level: info
//! live: false                  # fetch unrecorded URLs from the network
//! record: false                # store live responses in the replay directory
//! sentiment: 127.0.0.1:7070    # sentiment classifier
//! ontology: classes.txt
//! serve_stale: false
//! ```
//!
//! `VWEAVE_LISTEN` overrides `listen`. API tokens are read only from
//! `VWEAVE_TWITTER_TOKEN`, `VWEAVE_FOURSQUARE_TOKEN` and `VWEAVE_YELP_TOKEN`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;
use vweave_core::mapping::{parse_ontology_classes, MappingError};
use vweave_core::vtable::operators::StandardOptions;
use vweave_core::vtable::{Clock, RuntimeConfig, SystemClock, WebFetcher};
use vweave_core::{parse_mappings, Engine, ObdaSpec, Registry, VTableRuntime};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key 'mappings'")]
    MissingMappings,
    #[error("{key}: {path} does not exist")]
    MissingPath { key: &'static str, path: String },
    #[error("{path}: {source}")]
    Mapping { path: String, source: MappingError },
    #[error("{path}: {message}")]
    Ontology { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub mappings: PathBuf,
    pub fixtures: PathBuf,
    pub replay: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub listen: String,
    pub log_level: String,
    pub live: bool,
    pub record: bool,
    pub sentiment: Option<String>,
    pub ontology: Option<PathBuf>,
    pub serve_stale: bool,
}

fn parse_bool(line: usize, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Syntax {
            line,
            message: format!("expected a boolean, found {v:?}"),
        }),
    }
}

impl EngineConfig {
    /// Defaults for a bare mapping file: its directory serves `file:` URLs
    /// and a sibling `replay/` directory, if present, holds HTTP responses.
    pub fn for_mappings(path: &Path) -> Self {
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let replay = dir.join("replay");
        Self {
            mappings: path.to_path_buf(),
            fixtures: dir,
            replay: replay.is_dir().then_some(replay),
            cache_dir: None,
            listen: DEFAULT_LISTEN.into(),
            log_level: "info".into(),
            live: false,
            record: false,
            sentiment: None,
            ontology: None,
            serve_stale: false,
        }
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut mappings = None;
        let mut cfg = Self::for_mappings(&base.join("mappings.obda"));
        cfg.fixtures = base.to_path_buf();
        cfg.replay = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(" #").next().unwrap_or("").trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((key, value)) = content.split_once(':') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: "expected 'key: value'".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let path = || base.join(value);
            match key {
                "mappings" => mappings = Some(path()),
                "fixtures" => cfg.fixtures = path(),
                "replay" => cfg.replay = Some(path()),
                "cache_dir" => cfg.cache_dir = Some(path()),
                "listen" => cfg.listen = value.to_string(),
                "log_level" => cfg.log_level = value.to_string(),
                "live" => cfg.live = parse_bool(line, value)?,
                "record" => cfg.record = parse_bool(line, value)?,
                "sentiment" => cfg.sentiment = Some(value.to_string()),
                "ontology" => cfg.ontology = Some(path()),
                "serve_stale" => cfg.serve_stale = parse_bool(line, value)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        cfg.mappings = mappings.ok_or(ConfigError::MissingMappings)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Applies `VWEAVE_LISTEN`.
    pub fn with_env(mut self) -> Self {
        if let Ok(listen) = std::env::var("VWEAVE_LISTEN") {
            if !listen.is_empty() {
                self.listen = listen;
            }
        }
        self
    }

    /// Every referenced path must exist.
    pub fn check_paths(&self) -> Result<(), ConfigError> {
        let required = [
            ("mappings", Some(&self.mappings)),
            ("fixtures", Some(&self.fixtures)),
            ("replay", self.replay.as_ref()),
            ("ontology", self.ontology.as_ref()),
        ];
        for (key, path) in required {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(ConfigError::MissingPath {
                        key,
                        path: p.display().to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn build_engine(&self) -> Result<Engine, ConfigError> {
        self.build_engine_with_clock(Arc::new(SystemClock))
    }

    pub fn build_engine_with_clock(&self, clock: Arc<dyn Clock>) -> Result<Engine, ConfigError> {
        self.check_paths()?;
        let mut fetcher = WebFetcher::new(&self.fixtures)
            .with_live(self.live)
            .with_recording(self.record);
        if let Some(dir) = &self.replay {
            fetcher = fetcher.with_replay_dir(dir);
        }
        let registry = Registry::standard(&StandardOptions {
            sentiment_address: self.sentiment.clone(),
            ..StandardOptions::default()
        });
        let runtime = Arc::new(VTableRuntime::new(
            registry,
            Arc::new(fetcher),
            clock,
            RuntimeConfig {
                spill_dir: self.cache_dir.clone(),
                serve_stale: self.serve_stale,
            },
        ));
        let path = self.mappings.display().to_string();
        let text = std::fs::read_to_string(&self.mappings).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        let mapping_err = |source| ConfigError::Mapping {
            path: path.clone(),
            source,
        };
        let mut spec = ObdaSpec::new(
            parse_mappings(&text).map_err(mapping_err)?,
            runtime.registry(),
        )
        .map_err(mapping_err)?;
        if let Some(o) = &self.ontology {
            let opath = o.display().to_string();
            let text = std::fs::read_to_string(o).map_err(|source| ConfigError::Io {
                path: opath.clone(),
                source,
            })?;
            let classes =
                parse_ontology_classes(&text).map_err(|message| ConfigError::Ontology {
                    path: opath,
                    message,
                })?;
            spec = spec.with_ontology_classes(classes);
        }
        Ok(Engine::new(Arc::new(spec), runtime))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_relative_paths() {
        let cfg = EngineConfig::parse(
            "# demo\nmappings: m.obda\nreplay: rec # recorded\nlive: yes\nlisten: 0.0.0.0:9\n",
            Path::new("/srv/x"),
        )
        .unwrap();
        assert_eq!(cfg.mappings, PathBuf::from("/srv/x/m.obda"));
        assert_eq!(cfg.replay, Some(PathBuf::from("/srv/x/rec")));
        assert_eq!(cfg.fixtures, PathBuf::from("/srv/x"));
        assert!(cfg.live);
        assert_eq!(cfg.listen, "0.0.0.0:9");
    }

    #[test]
    fn rejects_bad_lines() {
        let base = Path::new(".");
        assert!(matches!(
            EngineConfig::parse("replay: r\n", base),
            Err(ConfigError::MissingMappings)
        ));
        assert!(matches!(
            EngineConfig::parse("mappings: m\ncolour: red\n", base),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            EngineConfig::parse("mappings m\n", base),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            EngineConfig::parse("mappings: m\nlive: maybe\n", base),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }
}
