//! Rich-type reconciliation: resolving cell values to ranked candidate types.
//!
//! Only text columns are reconciled; numeric and date columns are rejected up
//! front. Every lookup goes through a per-run cache so that a cell text is
//! sent to the provider at most once, and the cache may be persisted to disk
//! between runs.

mod provider;

pub use provider::{provider_from_spec, FixtureProvider, HttpProvider, Provider};

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, Table};

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_CONCURRENCY: usize = 8;

/// One candidate type for a cell, with its relevance score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeCandidate {
    #[serde(rename = "id")]
    pub type_id: String,
    #[serde(rename = "name")]
    pub display_name: String,
    pub score: f64,
}

impl TypeCandidate {
    pub fn new(type_id: impl Into<String>, display_name: impl Into<String>, score: f64) -> Self {
        TypeCandidate { type_id: type_id.into(), display_name: display_name.into(), score }
    }

    fn validate(&self) -> Result<()> {
        if self.type_id.is_empty() {
            return Err(Error::Protocol("candidate with empty type id".into()));
        }
        if !self.score.is_finite() || self.score < 0.0 {
            return Err(Error::Protocol(format!("candidate {} has invalid score {}", self.type_id, self.score)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAnnotation {
    pub row: usize,
    pub cell_text: String,
    /// Sorted by score descending, at most `k` entries, unique type ids.
    pub candidates: Vec<TypeCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnAnnotation {
    pub position: usize,
    /// One entry per non-empty cell, in row order.
    pub cells: Vec<CellAnnotation>,
}

/// Annotations for the text columns of one table, keyed by column position.
pub type TableAnnotations = BTreeMap<usize, ColumnAnnotation>;

/// Queries `provider` and normalizes the answer: duplicate type ids are
/// merged by summing their scores, then candidates are ordered by score
/// descending (type id ascending on ties) and truncated to `k`.
pub fn fetch_candidates(provider: &dyn Provider, cell_text: &str, k: usize) -> Result<Vec<TypeCandidate>> {
    if k == 0 {
        return Err(Error::usage("k must be positive"));
    }
    let text = cell_text.trim();
    if text.is_empty() {
        return Err(Error::usage("cannot reconcile an empty cell"));
    }

    let raw = provider.search(text, k)?;
    let mut merged: Vec<TypeCandidate> = Vec::with_capacity(raw.len());
    let mut index: HashMap<String, usize> = HashMap::new();
    for candidate in raw {
        candidate.validate()?;
        match index.get(&candidate.type_id) {
            Some(&i) => merged[i].score += candidate.score,
            None => {
                index.insert(candidate.type_id.clone(), merged.len());
                merged.push(candidate);
            }
        }
    }
    merged.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.type_id.cmp(&b.type_id)));
    merged.truncate(k);
    Ok(merged)
}

#[derive(Serialize, Deserialize)]
struct DiskCacheEntry {
    provider: String,
    text: String,
    k: usize,
    candidates: Vec<TypeCandidate>,
}

#[derive(Serialize, Deserialize, Default)]
struct DiskCacheFile {
    entries: Vec<DiskCacheEntry>,
}

/// Cached, bounded-concurrency reconciliation against one provider.
pub struct Reconciler {
    provider: Arc<dyn Provider>,
    k: usize,
    concurrency: usize,
    cache: Mutex<HashMap<(String, usize), Vec<TypeCandidate>>>,
    disk_cache: Option<PathBuf>,
    requests: AtomicUsize,
}

impl Reconciler {
    pub fn new(provider: Arc<dyn Provider>) -> Self {
        Reconciler {
            provider,
            k: DEFAULT_TOP_K,
            concurrency: DEFAULT_CONCURRENCY,
            cache: Mutex::new(HashMap::new()),
            disk_cache: None,
            requests: AtomicUsize::new(0),
        }
    }

    pub fn with_top_k(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::usage("k must be positive"));
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_concurrency(mut self, concurrency: usize) -> Self {
        self.concurrency = concurrency.max(1);
        self
    }

    /// Loads entries for this provider from `path` (if it exists) and
    /// remembers the path for [`Reconciler::persist_cache`].
    pub fn with_disk_cache(mut self, path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        if path.exists() {
            let file: DiskCacheFile = serde_json::from_slice(&std::fs::read(&path)?)?;
            let mut cache = self.cache.lock().unwrap();
            for e in file.entries.into_iter().filter(|e| e.provider == self.provider.id()) {
                cache.insert((e.text, e.k), e.candidates);
            }
        }
        self.disk_cache = Some(path);
        Ok(self)
    }

    pub fn top_k(&self) -> usize {
        self.k
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    /// Number of provider requests issued so far (cache misses).
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    /// Writes the cache to the configured disk path, keeping entries that
    /// belong to other providers. No-op without a disk cache.
    pub fn persist_cache(&self) -> Result<()> {
        let Some(path) = &self.disk_cache else { return Ok(()) };
        let mut file: DiskCacheFile =
            if path.exists() { serde_json::from_slice(&std::fs::read(path)?)? } else { DiskCacheFile::default() };
        file.entries.retain(|e| e.provider != self.provider.id());

        let cache = self.cache.lock().unwrap();
        let mut mine: Vec<_> = cache.iter().collect();
        mine.sort_by(|a, b| a.0.cmp(b.0));
        file.entries.extend(mine.into_iter().map(|((text, k), candidates)| DiskCacheEntry {
            provider: self.provider.id().to_string(),
            text: text.clone(),
            k: *k,
            candidates: candidates.clone(),
        }));
        write_atomic(path, &serde_json::to_vec_pretty(&file)?)
    }

    /// Cached lookup of a single cell text.
    pub fn candidates(&self, cell_text: &str) -> Result<Vec<TypeCandidate>> {
        let key = (cell_text.trim().to_string(), self.k);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let fetched = self.fetch_uncached(&key.0)?;
        self.cache.lock().unwrap().insert(key, fetched.clone());
        Ok(fetched)
    }

    fn fetch_uncached(&self, text: &str) -> Result<Vec<TypeCandidate>> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        fetch_candidates(self.provider.as_ref(), text, self.k)
    }

    /// Annotates every non-empty cell of a text column.
    ///
    /// Distinct uncached texts are fetched by up to `concurrency` workers.
    /// The first failure stops workers from picking up further texts and is
    /// returned once in-flight requests drain.
    pub fn annotate_column(&self, column: &Column) -> Result<ColumnAnnotation> {
        if !column.kind().is_reconcilable() {
            return Err(Error::usage(format!(
                "column {} is {}; only text columns are reconciled",
                column.display_name(),
                column.kind()
            )));
        }

        let cells: Vec<(usize, &str)> =
            column.cells().iter().enumerate().map(|(row, c)| (row, c.trim())).filter(|(_, c)| !c.is_empty()).collect();

        let mut pending: Vec<&str> = {
            let cache = self.cache.lock().unwrap();
            cells.iter().map(|&(_, c)| c).filter(|c| !cache.contains_key(&(c.to_string(), self.k))).collect()
        };
        pending.sort_unstable();
        pending.dedup();
        self.fetch_all(&pending)?;

        let cache = self.cache.lock().unwrap();
        let cells = cells
            .into_iter()
            .map(|(row, text)| CellAnnotation {
                row,
                cell_text: text.to_string(),
                candidates: cache[&(text.to_string(), self.k)].clone(),
            })
            .collect();
        Ok(ColumnAnnotation { position: column.position(), cells })
    }

    fn fetch_all(&self, texts: &[&str]) -> Result<()> {
        if texts.is_empty() {
            return Ok(());
        }
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let results: Mutex<Vec<Option<Result<Vec<TypeCandidate>>>>> =
            Mutex::new((0..texts.len()).map(|_| None).collect());
        let workers = self.concurrency.min(texts.len());

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if failed.load(Ordering::Acquire) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::AcqRel);
                    let Some(text) = texts.get(i) else { break };
                    let outcome = self.fetch_uncached(text);
                    if outcome.is_err() {
                        failed.store(true, Ordering::Release);
                    }
                    results.lock().unwrap()[i] = Some(outcome);
                });
            }
        });

        let mut cache = self.cache.lock().unwrap();
        let mut first_error = None;
        for (text, outcome) in texts.iter().zip(results.into_inner().unwrap()) {
            match outcome {
                Some(Ok(candidates)) => {
                    cache.insert((text.to_string(), self.k), candidates);
                }
                Some(Err(e)) if first_error.is_none() => first_error = Some(e),
                _ => {}
            }
        }
        first_error.map_or(Ok(()), Err)
    }

    /// Annotates every text column of `table`.
    pub fn annotate_table(&self, table: &Table) -> Result<TableAnnotations> {
        table
            .columns()
            .iter()
            .filter(|c| c.kind().is_reconcilable())
            .map(|c| Ok((c.position(), self.annotate_column(c)?)))
            .collect()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
