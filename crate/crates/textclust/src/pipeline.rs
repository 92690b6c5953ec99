//! The select, query and cluster stages and their reports.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use textclust_core::clustering::{
    kmeans_pp, spectral_with_iters, wckmeans, wcsc, SpectralOperators, WcscOptions, KMEANS_MAX_ITERS, SPECTRAL_KMEANS_ITERS,
    WCKMEANS_MAX_ITERS,
};
use textclust_core::eval::evaluate;
use textclust_core::oracle::{run_queries, edge_queries, triangle_queries, ConstraintSet, MockOracle, Oracle, QueryOptions, Relation, SkipReason};
use textclust_core::weighting::{build_from_set, MatrixMode};
use textclust_core::{
    select_edges, select_triangles, BudgetPlan, ClusterAssignment, Clusterer, Corpus, EmbeddingMatrix, QueryMode,
    WeightedConstraintMatrix, WhitespaceTokens,
};

use crate::cache::CachedOracle;
use crate::config::{OracleKind, PipelineConfig};
use crate::error::{Error, Result};
use crate::http::{HttpConfig, HttpOracle};
use crate::io::{self, SelectionFile};

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn load(config: &PipelineConfig) -> Result<Corpus> {
    io::load_corpus(config.corpus_path()?, config.embeddings_path()?, &WhitespaceTokens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub mode: String,
    pub budget: u64,
    pub corpus_tokens: usize,
    pub mean_tokens: f64,
    pub planned: usize,
    pub selected: usize,
    pub exhausted: bool,
    pub elapsed_ms: f64,
}

/// Resolves the budget into a query count and writes the greedy selection.
pub fn select(config: &PipelineConfig, corpus: &Corpus) -> Result<(SelectionFile, SelectReport)> {
    let start = Instant::now();
    let budget = config.budget.resolve(corpus.total_tokens());
    let plan = BudgetPlan::new(budget, corpus.mean_tokens(), corpus.len(), config.mode)?;
    let (items, scores, exhausted) = match config.mode {
        QueryMode::Edge => {
            let sel = select_edges(corpus, plan.queries)?;
            let items = sel.id_pairs().into_iter().map(|(a, b)| vec![a, b]).collect();
            (items, sel.scores, sel.exhausted)
        }
        QueryMode::Triangle => {
            let sel = select_triangles(corpus, plan.queries)?;
            let items = sel.id_triples().into_iter().map(|(a, b, c)| vec![a, b, c]).collect();
            (items, sel.scores, sel.exhausted)
        }
    };
    let file = SelectionFile {
        mode: config.mode.as_str().into(),
        budget,
        mean_tokens: corpus.mean_tokens(),
        corpus_tokens: corpus.total_tokens(),
        n: corpus.len(),
        planned: plan.queries,
        exhausted,
        items,
        scores,
    };
    if exhausted {
        log::warn!("selection exhausted after {} of {} queries", file.items.len(), plan.queries);
    }
    io::write_json(&config.selection_path(), &file)?;
    let report = SelectReport {
        mode: file.mode.clone(),
        budget,
        corpus_tokens: file.corpus_tokens,
        mean_tokens: file.mean_tokens,
        planned: plan.queries,
        selected: file.items.len(),
        exhausted,
        elapsed_ms: millis(start),
    };
    Ok((file, report))
}

pub fn cmd_select(config: &PipelineConfig) -> Result<SelectReport> {
    let corpus = load(config)?;
    Ok(select(config, &corpus)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryReport {
    pub mode: String,
    pub oracle: String,
    pub queries: usize,
    pub answered: usize,
    pub skipped: usize,
    pub dispatched: usize,
    /// Calls that reached the underlying backend rather than the cache.
    pub backend_calls: usize,
    pub cache_hits: usize,
    pub parse_failures: usize,
    pub transport_failures: usize,
    pub budget: u64,
    /// Corpus-text tokens of the queried texts.
    pub text_tokens: usize,
    /// Whitespace tokens of every prompt sent, scaffolding and retries included.
    pub prompt_tokens: usize,
    pub overhead_tokens: usize,
    pub must_links: usize,
    pub cannot_links: usize,
    pub conflicts: usize,
    /// Share of constraints that disagree with ground truth, when labels exist.
    pub error_rate: Option<f64>,
    pub elapsed_ms: f64,
}

/// The configured oracle, optionally behind the replay cache.
pub enum Backend {
    Direct(Box<dyn Oracle>),
    Cached(CachedOracle<Box<dyn Oracle>>),
}

impl Backend {
    pub fn oracle(&self) -> &dyn Oracle {
        match self {
            Backend::Direct(o) => o.as_ref(),
            Backend::Cached(c) => c,
        }
    }
}

/// Builds the backend; missing credentials or labels fail here, before any
/// query is sent.
pub fn build_backend(config: &PipelineConfig, corpus: &Corpus) -> Result<Backend> {
    let inner: Box<dyn Oracle> = match config.oracle {
        OracleKind::Mock => {
            let labels = corpus
                .label_indices()
                .ok_or_else(|| Error::Config("mock oracle needs a label on every text".into()))?;
            Box::new(MockOracle::new(labels, config.noise_rate, config.seed)?)
        }
        OracleKind::Http => Box::new(HttpOracle::new(HttpConfig {
            url: config.url.clone(),
            model: config.model.clone(),
            api_key_env: config.api_key_env.clone(),
            temperature: config.temperature,
            parallelism: config.parallelism,
            ..HttpConfig::default()
        })?),
        OracleKind::Cached => {
            let path = config
                .cache
                .as_deref()
                .ok_or_else(|| Error::Config("cached oracle needs a cache file".into()))?;
            return Ok(Backend::Cached(CachedOracle::replay(
                &config.replay_kind,
                &config.model,
                config.temperature,
                path,
            )?));
        }
    };
    Ok(match config.cache.as_deref() {
        Some(path) => Backend::Cached(CachedOracle::wrap(inner, path)?),
        None => Backend::Direct(inner),
    })
}

fn error_rate(set: &ConstraintSet, corpus: &Corpus) -> Option<f64> {
    let labels = corpus.label_indices()?;
    if set.is_empty() {
        return None;
    }
    let wrong = set
        .iter()
        .filter(|c| (labels[c.a] == labels[c.b]) != (c.relation == Relation::MustLink))
        .count();
    Some(wrong as f64 / set.len() as f64)
}

/// Asks the oracle about every selected item and writes the constraints.
pub fn query(
    config: &PipelineConfig,
    corpus: &Corpus,
    selection: &SelectionFile,
) -> Result<(ConstraintSet, QueryReport)> {
    let start = Instant::now();
    if selection.n != corpus.len() {
        return Err(Error::Config(format!(
            "selection was made for {} texts but the corpus has {}",
            selection.n,
            corpus.len()
        )));
    }
    let mode = selection.query_mode()?;
    let template = config.template();
    let queries = match mode {
        QueryMode::Edge => edge_queries(corpus, &selection.pairs()?, &template),
        QueryMode::Triangle => triangle_queries(corpus, &selection.triples()?, &template),
    };
    if queries.iter().flat_map(|q| &q.ids).any(|&id| id >= corpus.len()) {
        return Err(Error::Config("selection refers to ids outside the corpus".into()));
    }
    let backend = build_backend(config, corpus)?;
    let options = QueryOptions {
        retries: config.retries,
    };
    let outcome = run_queries(corpus, &queries, backend.oracle(), options, &WhitespaceTokens);
    let all_transport = !queries.is_empty()
        && outcome.answered == 0
        && outcome.skipped.iter().all(|s| matches!(s.reason, SkipReason::Transport(_)));
    if all_transport {
        let reason = match &outcome.skipped[0].reason {
            SkipReason::Transport(m) | SkipReason::Unparseable(m) => m.clone(),
        };
        return Err(Error::Transport(format!("every query failed; first error: {reason}")));
    }
    let (backend_calls, cache_hits) = match &backend {
        Backend::Direct(_) => (outcome.dispatched, 0),
        Backend::Cached(c) => (c.forwarded(), c.hits()),
    };
    io::write_constraints(&config.constraints_path(), &outcome.constraints)?;
    let set = outcome.constraints;
    let report = QueryReport {
        mode: mode.as_str().into(),
        oracle: config.oracle.as_str().into(),
        queries: queries.len(),
        answered: outcome.answered,
        skipped: outcome.skipped.len(),
        dispatched: outcome.dispatched,
        backend_calls,
        cache_hits,
        parse_failures: outcome.parse_failures,
        transport_failures: outcome.transport_failures,
        budget: selection.budget,
        text_tokens: outcome.text_tokens,
        prompt_tokens: outcome.prompt_tokens,
        overhead_tokens: outcome.prompt_tokens.saturating_sub(outcome.text_tokens),
        must_links: set.must_link_count(),
        cannot_links: set.cannot_link_count(),
        conflicts: set.conflicts(),
        error_rate: error_rate(&set, corpus),
        elapsed_ms: millis(start),
    };
    if let Some(rate) = report.error_rate {
        log::info!("constraint error rate against labels: {rate:.4}");
    }
    io::write_json(&config.query_report_path(), &report)?;
    Ok((set, report))
}

pub fn cmd_query(config: &PipelineConfig) -> Result<QueryReport> {
    let corpus = load(config)?;
    let selection: SelectionFile = io::read_json(&config.selection_path())?;
    Ok(query(config, &corpus, &selection)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStats {
    pub must_links: usize,
    pub cannot_links: usize,
    /// Distinct texts touched by at least one constraint.
    pub touched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WcscStats {
    pub alpha: Option<f64>,
    pub doublings: usize,
    pub fell_back: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    pub clusterer: String,
    pub clusters: usize,
    pub n: usize,
    pub cluster_sizes: Vec<usize>,
    pub iterations: usize,
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wcsc: Option<WcscStats>,
    /// Query-stage token accounting, when a query report is available.
    pub tokens: Option<QueryReport>,
    pub timings_ms: Value,
    pub config: Value,
}

fn cluster_count(config: &PipelineConfig, corpus: &Corpus) -> Result<usize> {
    let k = match config.clusters {
        Some(k) => k,
        None => corpus
            .label_indices()
            .map(|l| l.iter().max().map_or(0, |m| m + 1))
            .ok_or_else(|| Error::Config("set the number of clusters or provide labels".into()))?,
    };
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 clusters, got {k}")));
    }
    if k > corpus.len() {
        return Err(textclust_core::Error::TooManyClusters { k, n: corpus.len() }.into());
    }
    Ok(k)
}

/// Loads the configured constraints, or an empty set when the default
/// path has not been written.
fn constraints_for(config: &PipelineConfig) -> Result<ConstraintSet> {
    let path = config.constraints_path();
    if config.constraints.is_none() && !path.exists() {
        log::warn!("no constraints at {}; clustering without them", path.display());
        return Ok(ConstraintSet::new());
    }
    io::load_constraints(&path)
}

/// Runs the configured clusterer and writes assignments and the report.
/// Writes the normalized Laplacian and the shifted constraint operator in
/// the embedding binary layout.
fn dump_operators(config: &PipelineConfig, emb: &EmbeddingMatrix, r: &WeightedConstraintMatrix, alpha: f64) -> Result<()> {
    let ops = SpectralOperators::build(emb, r, Some(alpha))?;
    let n = emb.rows();
    let laplacian: Vec<Vec<f64>> = (0..n).map(|i| ops.laplacian.row(i).iter().copied().collect()).collect();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| ops.constraint[(i, j)] + if i == j { alpha } else { 0.0 }).collect())
        .collect();
    io::write_embeddings_binary(&config.laplacian_path(), &laplacian)?;
    io::write_embeddings_binary(&config.constraint_operator_path(), &shifted)
}

pub fn cluster(
    config: &PipelineConfig,
    corpus: &Corpus,
    constraints: Option<&ConstraintSet>,
    tokens: Option<QueryReport>,
    mut timings: serde_json::Map<String, Value>,
) -> Result<(ClusterAssignment, ClusterReport)> {
    let start = Instant::now();
    let k = cluster_count(config, corpus)?;
    let emb = corpus.embeddings();
    let owned;
    let constraints = match (config.clusterer.is_constrained(), constraints) {
        (false, _) => None,
        (true, Some(c)) => Some(c),
        (true, None) => {
            owned = constraints_for(config)?;
            Some(&owned)
        }
    };
    if let Some(set) = constraints {
        if set.max_id().is_some_and(|m| m >= corpus.len()) {
            return Err(Error::Config("constraints refer to ids outside the corpus".into()));
        }
    }
    let mut wcsc_stats = None;
    let assignment = match config.clusterer {
        Clusterer::KMeans => kmeans_pp(emb, k, config.seed, config.max_iters.unwrap_or(KMEANS_MAX_ITERS))?,
        Clusterer::Spectral => {
            spectral_with_iters(emb, k, config.seed, config.max_iters.unwrap_or(SPECTRAL_KMEANS_ITERS))?
        }
        Clusterer::WcKMeans => {
            let set = constraints.expect("constrained clusterer");
            let m = build_from_set(corpus, set, config.weighting, MatrixMode::Wckmeans, &config.ranges)?;
            io::write_weights(&config.weights_path(), &m)?;
            wckmeans(emb, k, &m, config.seed, config.max_iters.unwrap_or(WCKMEANS_MAX_ITERS))?
        }
        Clusterer::Wcsc => {
            let set = constraints.expect("constrained clusterer");
            let m = build_from_set(corpus, set, config.weighting, MatrixMode::Wcsc, &config.ranges)?;
            io::write_weights(&config.weights_path(), &m)?;
            let options = WcscOptions {
                alpha: config.alpha,
                kmeans_iters: config.max_iters.unwrap_or(SPECTRAL_KMEANS_ITERS),
            };
            let (a, rep) = wcsc(emb, k, &m, options, config.seed)?;
            if rep.fell_back {
                log::warn!("no feasible constrained eigenvectors; used the unconstrained embedding");
            }
            match rep.alpha {
                Some(alpha) if config.dump_operators => dump_operators(config, emb, &m, alpha)?,
                None if config.dump_operators => log::warn!("no constrained operators to dump"),
                _ => {}
            }
            wcsc_stats = Some(WcscStats {
                alpha: rep.alpha,
                doublings: rep.doublings,
                fell_back: rep.fell_back,
                max_residual: rep.max_residual,
            });
            a
        }
    };
    io::write_assignments(&config.assignments_path(), &assignment.labels)?;
    let metrics = corpus
        .label_indices()
        .map(|truth| evaluate(&assignment.labels, &truth))
        .transpose()?;
    timings.insert("cluster".into(), Value::from(millis(start)));
    let report = ClusterReport {
        acc: metrics.map(|m| m.acc),
        nmi: metrics.map(|m| m.nmi),
        clusterer: config.clusterer.as_str().into(),
        clusters: k,
        n: corpus.len(),
        cluster_sizes: assignment.cluster_sizes(),
        iterations: assignment.iterations_used,
        objective: assignment.objective_trace.last().copied(),
        constraints: constraints.map(|set| {
            let touched: std::collections::HashSet<usize> = set.iter().flat_map(|c| [c.a, c.b]).collect();
            ConstraintStats {
                must_links: set.must_link_count(),
                cannot_links: set.cannot_link_count(),
                touched: touched.len(),
            }
        }),
        wcsc: wcsc_stats,
        tokens,
        timings_ms: Value::Object(timings),
        config: config.echo(),
    };
    io::write_json(&config.report_path(), &report)?;
    Ok((assignment, report))
}

fn read_if_exists<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>> {
    if path.exists() {
        io::read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

pub fn cmd_cluster(config: &PipelineConfig) -> Result<ClusterReport> {
    let start = Instant::now();
    let corpus = load(config)?;
    let tokens = read_if_exists(&config.query_report_path())?;
    let mut timings = serde_json::Map::new();
    timings.insert("load".into(), Value::from(millis(start)));
    Ok(cluster(config, &corpus, None, tokens, timings)?.1)
}

/// Select, query and cluster in sequence; a failure names its stage.
pub fn cmd_pipeline(config: &PipelineConfig) -> Result<ClusterReport> {
    let start = Instant::now();
    let corpus = load(config).map_err(|e| e.in_stage("load"))?;
    let mut timings = serde_json::Map::new();
    timings.insert("load".into(), Value::from(millis(start)));
    let (selection, sel) = select(config, &corpus).map_err(|e| e.in_stage("select"))?;
    timings.insert("select".into(), Value::from(sel.elapsed_ms));
    let (constraints, q) = query(config, &corpus, &selection).map_err(|e| e.in_stage("query"))?;
    timings.insert("query".into(), Value::from(q.elapsed_ms));
    let report = cluster(config, &corpus, Some(&constraints), Some(q), timings)
        .map_err(|e| e.in_stage("cluster"))?
        .1;
    Ok(report)
}
