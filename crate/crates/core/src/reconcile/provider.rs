use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use super::TypeCandidate;
use crate::error::{Error, Result};

/// A source of ranked rich-type candidates for a cell value.
///
/// Implementations return raw provider answers; normalization (merging,
/// ordering, truncation) happens in [`super::fetch_candidates`].
pub trait Provider: Send + Sync {
    /// Stable identifier used to key persistent cache entries.
    fn id(&self) -> &str;

    fn search(&self, text: &str, limit: usize) -> Result<Vec<TypeCandidate>>;
}

#[derive(Deserialize)]
struct FixtureFile {
    entries: HashMap<String, Vec<TypeCandidate>>,
}

/// Offline provider backed by a JSON fixture. Lookup is case-insensitive on
/// trimmed cell text; unknown text yields no candidates.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    id: String,
    entries: HashMap<String, Vec<TypeCandidate>>,
}

impl FixtureProvider {
    pub fn from_json(id: impl Into<String>, json: &str) -> Result<Self> {
        let file: FixtureFile = serde_json::from_str(json).map_err(|e| Error::Protocol(format!("fixture: {e}")))?;
        let mut entries: HashMap<String, Vec<TypeCandidate>> = HashMap::new();
        for (text, candidates) in file.entries {
            for c in &candidates {
                c.validate()?;
            }
            entries.entry(fixture_key(&text)).or_default().extend(candidates);
        }
        Ok(FixtureProvider { id: id.into(), entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path)?;
        Self::from_json(format!("fixture:{}", path.display()), &json)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn fixture_key(text: &str) -> String {
    text.trim().to_lowercase()
}

impl Provider for FixtureProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, text: &str, _limit: usize) -> Result<Vec<TypeCandidate>> {
        Ok(self.entries.get(&fixture_key(text)).cloned().unwrap_or_default())
    }
}

#[derive(Deserialize)]
struct SearchResponse {
    result: Vec<TypeCandidate>,
}

/// Client for `GET <base>/search?query=<text>&limit=<k>` endpoints answering
/// `{"result": [{"id", "name", "score"}, ...]}`.
pub struct HttpProvider {
    id: String,
    base: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    pub fn new(base: &str, timeout: Duration) -> Result<Self> {
        let base = base.trim_end_matches('/').to_string();
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(Error::usage(format!("provider URL must be http(s): {base}")));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpProvider { id: format!("http:{base}"), base, client })
    }
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn search(&self, text: &str, limit: usize) -> Result<Vec<TypeCandidate>> {
        let url = format!("{}/search", self.base);
        let limit = limit.to_string();
        log::debug!("reconcile GET {url} query={text:?}");
        let response = self
            .client
            .get(&url)
            .query(&[("query", text), ("limit", limit.as_str())])
            .send()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Transport(format!("{url} answered {status}")));
        }
        let body = response.bytes().map_err(|e| Error::Transport(e.to_string()))?;
        let parsed: SearchResponse =
            serde_json::from_slice(&body).map_err(|e| Error::Protocol(format!("{url}: {e}")))?;
        Ok(parsed.result)
    }
}

/// Parses `fixture:<path>` or `http:<url>` (a bare `http(s)://` URL is also accepted).
pub fn provider_from_spec(spec: &str, timeout: Duration) -> Result<Box<dyn Provider>> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(HttpProvider::new(spec, timeout)?));
    }
    match spec.split_once(':') {
        Some(("fixture", path)) => Ok(Box::new(FixtureProvider::load(path)?)),
        Some(("http", url)) => Ok(Box::new(HttpProvider::new(url, timeout)?)),
        _ => Err(Error::usage(format!("unrecognized provider {spec:?}; expected fixture:<path> or http:<url>"))),
    }
}
