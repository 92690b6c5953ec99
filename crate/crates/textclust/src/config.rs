//! Pipeline configuration: defaults, a flat `key = value` file, then
//! command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Value};
use textclust_core::oracle::PromptTemplate;
use textclust_core::weighting::{Scheme, WeightRanges};
use textclust_core::{Clusterer, QueryMode};

use crate::error::{Error, Result};
use crate::http::{DEFAULT_API_KEY_ENV, DEFAULT_MODEL, DEFAULT_URL};

/// Token budget, either absolute or as a share of the corpus size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Tokens(u64),
    Fraction(f64),
}

impl Budget {
    pub fn resolve(self, corpus_tokens: usize) -> u64 {
        match self {
            Budget::Tokens(q) => q,
            Budget::Fraction(f) => (f * corpus_tokens as f64).floor() as u64,
        }
    }
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("budget must be a token count or a percentage, got {s:?}"));
        if let Some(p) = s.strip_suffix('%') {
            let f: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(f >= 0.0 && f.is_finite()) {
                return Err(bad());
            }
            return Ok(Budget::Fraction(f / 100.0));
        }
        s.parse().map(Budget::Tokens).map_err(|_| bad())
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Tokens(q) => write!(f, "{q}"),
            Budget::Fraction(x) => write!(f, "{}%", x * 100.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Mock,
    Http,
    /// Answers only from the cache file.
    Cached,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::Mock => "mock",
            OracleKind::Http => "http",
            OracleKind::Cached => "cached",
        }
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mock" => Ok(OracleKind::Mock),
            "http" | "http-llm" | "llm" => Ok(OracleKind::Http),
            "cached" | "cache" => Ok(OracleKind::Cached),
            _ => Err(Error::Config(format!("unknown oracle {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Directory for every artifact whose path is not set explicitly.
    pub output: PathBuf,
    pub selection: Option<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub budget: Budget,
    /// Defaults to the number of distinct labels when the corpus has them.
    pub clusters: Option<usize>,
    pub mode: QueryMode,
    pub oracle: OracleKind,
    pub model: String,
    pub url: String,
    pub api_key_env: String,
    pub temperature: f64,
    /// Backend kind a cache-only replay is keyed under.
    pub replay_kind: String,
    pub template: String,
    pub weighting: Scheme,
    pub clusterer: Clusterer,
    pub alpha: Option<f64>,
    pub max_iters: Option<usize>,
    pub noise_rate: f64,
    pub seed: u64,
    pub parallelism: usize,
    pub retries: usize,
    /// Writes the WCSC operators next to the other artifacts.
    pub dump_operators: bool,
    pub ranges: WeightRanges,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            embeddings: None,
            output: PathBuf::from("out"),
            selection: None,
            constraints: None,
            cache: None,
            budget: Budget::Fraction(1.0),
            clusters: None,
            mode: QueryMode::Triangle,
            oracle: OracleKind::Mock,
            model: DEFAULT_MODEL.into(),
            url: DEFAULT_URL.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            temperature: 0.0,
            replay_kind: "http-llm".into(),
            template: "default".into(),
            weighting: Scheme::Pmi,
            clusterer: Clusterer::Wcsc,
            alpha: None,
            max_iters: None,
            noise_rate: 0.0,
            seed: 0,
            parallelism: 4,
            retries: 2,
            dump_operators: false,
            ranges: WeightRanges::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn optional(value: &str) -> Option<&str> {
    let v = value.trim();
    (!v.is_empty() && v != "none" && v != "auto").then_some(v)
}

pub const KEYS: &[&str] = &[
    "corpus",
    "embeddings",
    "output",
    "selection",
    "constraints",
    "cache",
    "budget",
    "clusters",
    "mode",
    "oracle",
    "model",
    "url",
    "api_key_env",
    "temperature",
    "replay_kind",
    "template",
    "weighting",
    "clusterer",
    "alpha",
    "max_iters",
    "noise_rate",
    "seed",
    "parallelism",
    "retries",
    "dump_operators",
];

impl PipelineConfig {
    /// Applies one setting. Keys accept `-` or `_` as separators.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "corpus" => self.corpus = Some(v.into()),
            "embeddings" => self.embeddings = Some(v.into()),
            "output" => self.output = v.into(),
            "selection" => self.selection = Some(v.into()),
            "constraints" => self.constraints = Some(v.into()),
            "cache" => self.cache = optional(v).map(PathBuf::from),
            "budget" => self.budget = v.parse()?,
            "clusters" => self.clusters = optional(v).map(|x| parse(&key, x)).transpose()?,
            "mode" => self.mode = parse(&key, v)?,
            "oracle" => self.oracle = v.parse()?,
            "model" => self.model = v.into(),
            "url" => self.url = v.into(),
            "api_key_env" => self.api_key_env = v.into(),
            "temperature" => self.temperature = parse(&key, v)?,
            "replay_kind" => self.replay_kind = v.into(),
            "template" => {
                if v != "default" && PromptTemplate::preset(v).is_none() {
                    return Err(Error::Config(format!("unknown template {v:?}")));
                }
                self.template = v.into();
            }
            "weighting" => self.weighting = parse(&key, &v.to_ascii_lowercase())?,
            "clusterer" => self.clusterer = parse(&key, v)?,
            "alpha" => self.alpha = optional(v).map(|x| parse(&key, x)).transpose()?,
            "max_iters" => self.max_iters = optional(v).map(|x| parse(&key, x)).transpose()?,
            "noise_rate" => {
                let rho: f64 = parse(&key, v)?;
                if !(0.0..=1.0).contains(&rho) {
                    return Err(Error::Config(format!("noise_rate must lie in [0, 1], got {rho}")));
                }
                self.noise_rate = rho;
            }
            "seed" => self.seed = parse(&key, v)?,
            "parallelism" => {
                self.parallelism = parse(&key, v)?;
                if self.parallelism == 0 {
                    return Err(Error::Config("parallelism must be at least 1".into()));
                }
            }
            "retries" => self.retries = parse(&key, v)?,
            "dump_operators" => self.dump_operators = parse(&key, v)?,
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected key = value"))?;
            self.set(k, v).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text, path)
    }

    pub fn template(&self) -> PromptTemplate {
        PromptTemplate::preset(&self.template).unwrap_or_default()
    }

    fn artifact(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.output.join(name))
    }

    pub fn selection_path(&self) -> PathBuf {
        self.artifact(&self.selection, "selection.json")
    }

    pub fn constraints_path(&self) -> PathBuf {
        self.artifact(&self.constraints, "constraints.jsonl")
    }

    pub fn query_report_path(&self) -> PathBuf {
        self.output.join("query_report.json")
    }

    pub fn assignments_path(&self) -> PathBuf {
        self.output.join("assignments.jsonl")
    }

    pub fn weights_path(&self) -> PathBuf {
        self.output.join("weights.jsonl")
    }

    pub fn report_path(&self) -> PathBuf {
        self.output.join("report.json")
    }

    pub fn laplacian_path(&self) -> PathBuf {
        self.output.join("laplacian.bin")
    }

    pub fn constraint_operator_path(&self) -> PathBuf {
        self.output.join("constraint_operator.bin")
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.corpus.as_deref().ok_or_else(|| Error::Config("no corpus file configured".into()))
    }

    pub fn embeddings_path(&self) -> Result<&Path> {
        self.embeddings
            .as_deref()
            .ok_or_else(|| Error::Config("no embeddings file configured".into()))
    }

    /// Every setting as JSON, for reports.
    pub fn echo(&self) -> Value {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        json!({
            "corpus": path(&self.corpus),
            "embeddings": path(&self.embeddings),
            "output": self.output.display().to_string(),
            "selection": self.selection_path().display().to_string(),
            "constraints": self.constraints_path().display().to_string(),
            "cache": path(&self.cache),
            "budget": self.budget.to_string(),
            "clusters": self.clusters,
            "mode": self.mode.as_str(),
            "oracle": self.oracle.as_str(),
            "model": self.model,
            "url": self.url,
            "temperature": self.temperature,
            "template": self.template,
            "weighting": self.weighting.as_str(),
            "clusterer": self.clusterer.as_str(),
            "alpha": self.alpha,
            "max_iters": self.max_iters,
            "noise_rate": self.noise_rate,
            "seed": self.seed,
            "parallelism": self.parallelism,
            "retries": self.retries,
            "dump_operators": self.dump_operators,
            "weight_ranges": {
                "wcsc": [self.ranges.wcsc.0, self.ranges.wcsc.1],
                "must_link": [self.ranges.must_link.0, self.ranges.must_link.1],
                "cannot_link": [self.ranges.cannot_link.0, self.ranges.cannot_link.1],
            },
        })
    }
}
