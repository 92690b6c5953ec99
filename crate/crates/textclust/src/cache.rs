//! Replay cache for oracle answers, persisted as append-only JSON lines.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use textclust_core::oracle::{parse_response, Oracle, OracleError, Query};

use crate::error::{Error, Result};
use crate::io::append_line;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub prompt: String,
    pub answer: String,
}

/// Hex SHA-256 over backend kind, model, temperature and prompt bytes.
pub fn cache_key(kind: &str, model: &str, temperature: f64, prompt: &str) -> String {
    let mut h = Sha256::new();
    for part in [kind.as_bytes(), model.as_bytes(), temperature.to_string().as_bytes(), prompt.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    hex::encode(h.finalize())
}

/// Serves answers from disk and forwards misses to an inner backend.
/// Without a backend every miss is a transport error. Only answers that
/// parse are stored, so retries still reach the backend.
pub struct CachedOracle<O> {
    inner: Option<O>,
    kind: String,
    model: String,
    temperature: f64,
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
    file: Mutex<fs::File>,
    forwarded: AtomicUsize,
    hits: AtomicUsize,
}

impl<O: Oracle> CachedOracle<O> {
    pub fn wrap(inner: O, path: &Path) -> Result<Self> {
        let (kind, model, temperature) = (inner.kind().to_string(), inner.model().to_string(), inner.temperature());
        Self::open(Some(inner), kind, model, temperature, path)
    }
}

impl<O> CachedOracle<O> {
    /// Cache-only replay keyed as if answered by `kind`/`model`.
    pub fn replay(kind: &str, model: &str, temperature: f64, path: &Path) -> Result<Self> {
        Self::open(None, kind.into(), model.into(), temperature, path)
    }

    fn open(inner: Option<O>, kind: String, model: String, temperature: f64, path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(fs::File::open(path).map_err(|e| Error::io(path, e))?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: CacheRecord =
                    serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
                entries.entry(r.key).or_insert(r.answer);
            }
        } else if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(CachedOracle {
            inner,
            kind,
            model,
            temperature,
            path: path.to_path_buf(),
            entries: Mutex::new(entries),
            file: Mutex::new(file),
            forwarded: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
        })
    }

    /// Queries passed on to the inner backend.
    pub fn forwarded(&self) -> usize {
        self.forwarded.load(Ordering::Relaxed)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn key(&self, q: &Query) -> String {
        cache_key(&self.kind, &self.model, self.temperature, &q.prompt)
    }

    fn lookup(&self, key: &str) -> Option<String> {
        let hit = self.entries.lock().expect("cache lock").get(key).cloned();
        if hit.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        hit
    }

    fn store(&self, key: String, q: &Query, answer: &str) -> std::result::Result<(), OracleError> {
        if parse_response(answer, q.mode).is_err() {
            return Ok(());
        }
        let mut entries = self.entries.lock().expect("cache lock");
        if entries.contains_key(&key) {
            return Ok(());
        }
        let record = CacheRecord {
            key: key.clone(),
            prompt: q.prompt.clone(),
            answer: answer.to_string(),
        };
        let mut file = self.file.lock().expect("cache file lock");
        append_line(&mut file, &self.path, &record).map_err(|e| OracleError::Transport(e.to_string()))?;
        entries.insert(key, answer.to_string());
        Ok(())
    }
}

impl<O: Oracle> Oracle for CachedOracle<O> {
    fn kind(&self) -> &str {
        "cached"
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn temperature(&self) -> f64 {
        self.temperature
    }

    fn answer(&self, query: &Query) -> std::result::Result<String, OracleError> {
        self.answer_batch(std::slice::from_ref(query)).pop().expect("one reply per query")
    }

    fn answer_batch(&self, queries: &[Query]) -> Vec<std::result::Result<String, OracleError>> {
        let keys: Vec<String> = queries.iter().map(|q| self.key(q)).collect();
        let mut replies: Vec<Option<std::result::Result<String, OracleError>>> =
            keys.iter().map(|k| self.lookup(k).map(Ok)).collect();
        let misses: Vec<usize> = (0..queries.len()).filter(|&i| replies[i].is_none()).collect();
        if !misses.is_empty() {
            match &self.inner {
                None => {
                    for &i in &misses {
                        replies[i] = Some(Err(OracleError::Transport(format!(
                            "no cached answer for query over {:?}",
                            queries[i].ids
                        ))));
                    }
                }
                Some(inner) => {
                    let batch: Vec<Query> = misses.iter().map(|&i| queries[i].clone()).collect();
                    self.forwarded.fetch_add(batch.len(), Ordering::Relaxed);
                    for (&i, reply) in misses.iter().zip(inner.answer_batch(&batch)) {
                        let reply = reply.and_then(|answer| {
                            self.store(keys[i].clone(), &queries[i], &answer)?;
                            Ok(answer)
                        });
                        replies[i] = Some(reply);
                    }
                }
            }
        }
        replies.into_iter().map(|r| r.expect("every query answered")).collect()
    }
}
