use std::fs;
use std::path::Path;

use textclust::config::{Budget, OracleKind};
use textclust::io;
use textclust::synthetic::{generate, SyntheticSpec};
use textclust::{cmd_cluster, cmd_pipeline, cmd_query, cmd_select, PipelineConfig};
use textclust_core::{Clusterer, QueryMode};

fn write_synthetic(dir: &Path, n: usize, seed: u64) -> PipelineConfig {
    let data = generate(&SyntheticSpec {
        n,
        seed,
        ..SyntheticSpec::default()
    });
    io::write_corpus(&dir.join("corpus.jsonl"), &data.texts).unwrap();
    io::write_embeddings_binary(&dir.join("emb.bin"), &data.rows).unwrap();
    PipelineConfig {
        corpus: Some(dir.join("corpus.jsonl")),
        embeddings: Some(dir.join("emb.bin")),
        output: dir.join("out"),
        ..PipelineConfig::default()
    }
}

#[test]
fn end_to_end_reports_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_synthetic(dir.path(), 200, 1);
    let report = cmd_pipeline(&config).unwrap();
    let acc = report.acc.unwrap();
    let nmi = report.nmi.unwrap();
    assert!((0.0..=1.0).contains(&acc) && acc > 0.5, "acc {acc}");
    assert!((0.0..=1.0).contains(&nmi));
    let tokens = report.tokens.as_ref().unwrap();
    assert_eq!(tokens.error_rate, Some(0.0));
    assert_eq!(tokens.must_links + tokens.cannot_links, 3 * tokens.queries);
    assert!(tokens.text_tokens as u64 <= tokens.budget);
    assert!(tokens.prompt_tokens > tokens.text_tokens);
    assert!(report.wcsc.is_some());
    for f in ["selection.json", "constraints.jsonl", "query_report.json", "assignments.jsonl", "report.json", "weights.jsonl"] {
        assert!(config.output.join(f).exists(), "{f}");
    }
    let saved: serde_json::Value = serde_json::from_str(&fs::read_to_string(config.report_path()).unwrap()).unwrap();
    assert_eq!(saved["config"]["weight_ranges"]["wcsc"], serde_json::json!([0.5, 1.5]));
    assert_eq!(saved["acc"], serde_json::json!(acc));
}

#[test]
fn stages_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 120, 2);
    config.clusterer = Clusterer::WcKMeans;
    config.mode = QueryMode::Edge;
    let read = |p: &Path| fs::read(p).unwrap();
    cmd_select(&config).unwrap();
    cmd_query(&config).unwrap();
    cmd_cluster(&config).unwrap();
    let first = [
        read(&config.selection_path()),
        read(&config.constraints_path()),
        read(&config.assignments_path()),
        read(&config.weights_path()),
    ];
    cmd_select(&config).unwrap();
    cmd_query(&config).unwrap();
    cmd_cluster(&config).unwrap();
    let second = [
        read(&config.selection_path()),
        read(&config.constraints_path()),
        read(&config.assignments_path()),
        read(&config.weights_path()),
    ];
    assert_eq!(first, second);
}

#[test]
fn triangle_mode_doubles_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 300, 3);
    config.mode = QueryMode::Edge;
    let edge = cmd_select(&config).unwrap();
    let edge_q = cmd_query(&config).unwrap();
    config.mode = QueryMode::Triangle;
    let tri = cmd_select(&config).unwrap();
    let tri_q = cmd_query(&config).unwrap();
    let (ne, nt) = (edge_q.must_links + edge_q.cannot_links, tri_q.must_links + tri_q.cannot_links);
    assert_eq!(ne, edge.selected);
    assert_eq!(nt, 3 * tri.selected);
    let ratio = nt as f64 / ne as f64;
    assert!((1.9..=2.1).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_budget_gives_empty_selection() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 30, 4);
    config.budget = Budget::Tokens(0);
    let report = cmd_select(&config).unwrap();
    assert_eq!(report.selected, 0);
    let q = cmd_query(&config).unwrap();
    assert_eq!(q.queries, 0);
    assert_eq!(fs::read_to_string(config.constraints_path()).unwrap(), "");
    let c = cmd_cluster(&config).unwrap();
    assert_eq!(c.constraints.unwrap().must_links, 0);
    assert!(c.wcsc.unwrap().fell_back);
}

#[test]
fn cached_rerun_makes_no_backend_calls() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 150, 5);
    config.cache = Some(dir.path().join("cache.jsonl"));
    let first = cmd_pipeline(&config).unwrap();
    let first_tokens = first.tokens.clone().unwrap();
    assert_eq!(first_tokens.backend_calls, first_tokens.queries);
    let constraints = fs::read(config.constraints_path()).unwrap();

    let second = cmd_pipeline(&config).unwrap();
    let t = second.tokens.clone().unwrap();
    assert_eq!(t.backend_calls, 0);
    assert_eq!(t.cache_hits, t.queries);
    assert_eq!(fs::read(config.constraints_path()).unwrap(), constraints);
    assert_eq!((first.acc, first.nmi), (second.acc, second.nmi));
    assert_eq!(first.cluster_sizes, second.cluster_sizes);

    config.oracle = OracleKind::Cached;
    config.replay_kind = "mock".into();
    config.model = "ground-truth".into();
    let replayed = cmd_pipeline(&config).unwrap();
    assert_eq!(replayed.tokens.unwrap().backend_calls, 0);
    assert_eq!(fs::read(config.constraints_path()).unwrap(), constraints);
    assert_eq!(replayed.acc, first.acc);
}

#[test]
fn noisy_mock_completes_and_logs_error_rate() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 300, 6);
    config.noise_rate = 0.2;
    config.mode = QueryMode::Edge;
    let report = cmd_pipeline(&config).unwrap();
    let rate = report.tokens.unwrap().error_rate.unwrap();
    assert!(rate > 0.05 && rate < 0.4, "rate {rate}");
}

#[test]
fn unconstrained_report_has_no_constraint_stats() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 100, 7);
    config.clusterer = Clusterer::KMeans;
    let report = cmd_cluster(&config).unwrap();
    assert!(report.constraints.is_none());
    assert!(report.tokens.is_none());
    let json = serde_json::to_value(&report).unwrap();
    assert!(json.get("constraints").is_none());
    assert_eq!(json["config"]["clusterer"], "kmeans");
}

#[test]
fn validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 20, 8);
    config.clusters = Some(21);
    assert_eq!(cmd_cluster(&config).unwrap_err().exit_code(), 1);
    config.clusters = Some(1);
    assert_eq!(cmd_cluster(&config).unwrap_err().exit_code(), 1);

    config.clusters = None;
    config.oracle = OracleKind::Http;
    config.api_key_env = "TEXTCLUST_PIPELINE_TEST_NO_KEY".into();
    let err = cmd_pipeline(&config).unwrap_err();
    assert!(err.to_string().starts_with("query stage failed: configuration error"), "{err}");
    assert!(!config.constraints_path().exists());

    let unlabeled = dir.path().join("unlabeled.jsonl");
    let texts: String = (0..20).map(|i| format!("{{\"id\":{i},\"text\":\"t {i}\"}}\n")).collect();
    fs::write(&unlabeled, texts).unwrap();
    config.oracle = OracleKind::Mock;
    config.corpus = Some(unlabeled);
    assert!(cmd_pipeline(&config).unwrap_err().to_string().contains("label"));
}

#[test]
fn operators_dump_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_synthetic(dir.path(), 60, 3);
    cmd_pipeline(&config).unwrap();
    assert!(!config.laplacian_path().exists());
    config.dump_operators = true;
    cmd_pipeline(&config).unwrap();
    for path in [config.laplacian_path(), config.constraint_operator_path()] {
        let m = textclust::io::load_embeddings(&path).unwrap();
        assert_eq!(m.len(), 60);
        for i in 0..60 {
            assert_eq!(m[i].len(), 60);
            for j in 0..i {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }
}
