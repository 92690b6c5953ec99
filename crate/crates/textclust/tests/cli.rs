use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textclust"))
        .args(args)
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn synth(dir: &Path) {
    let out = run(&["synth", "--n", "120", "--seed", "3", "--out", "data"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn staged_commands_match_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    fs::write(
        d.join("run.cfg"),
        "corpus = data/corpus.jsonl\nembeddings = data/embeddings.bin\n# edge queries\nmode = edge\nbudget = 50%\n",
    )
    .unwrap();
    let common = ["--config", "run.cfg", "--clusterer", "wckmeans", "--seed", "4"];
    for stage in ["select", "query", "cluster"] {
        let mut args = vec![stage];
        args.extend_from_slice(&common);
        args.extend_from_slice(&["--output", "staged"]);
        let out = run(&args, d);
        assert!(out.status.success(), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut args = vec!["pipeline"];
    args.extend_from_slice(&common);
    args.extend_from_slice(&["--output", "whole"]);
    let out = run(&args, d);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["acc"].as_f64().unwrap() > 0.3);
    assert_eq!(report["config"]["mode"], "edge");
    assert_eq!(report["config"]["budget"], "50%");
    for f in ["selection.json", "constraints.jsonl", "assignments.jsonl"] {
        assert_eq!(fs::read(d.join("staged").join(f)).unwrap(), fs::read(d.join("whole").join(f)).unwrap(), "{f}");
    }
    let selection: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("whole/selection.json")).unwrap()).unwrap();
    // 120 texts of 10 tokens, half the corpus: floor(600 / 20)
    assert_eq!(selection["items"].as_array().unwrap().len(), 30);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let base = ["--corpus", "data/corpus.jsonl", "--embeddings", "data/embeddings.bin"];
    let code = |extra: &[&str]| {
        let mut args = vec!["pipeline"];
        args.extend_from_slice(&base);
        args.extend_from_slice(extra);
        run(&args, d).status.code().unwrap()
    };
    assert_eq!(run(&["--help"], d).status.code(), Some(0));
    assert_eq!(run(&["pipeline", "--bogus"], d).status.code(), Some(1));
    assert_eq!(code(&["--clusterer", "dbscan"]), 1);
    assert_eq!(code(&["--clusters", "500"]), 1);
    assert_eq!(run(&["select", "--corpus", "missing.jsonl", "--embeddings", "x"], d).status.code(), Some(1));

    let out = Command::new(env!("CARGO_BIN_EXE_textclust"))
        .args(["pipeline", "--oracle", "http", "--api-key-env", "TEXTCLUST_CLI_TEST_NO_KEY"])
        .args(base)
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TEXTCLUST_CLI_TEST_NO_KEY"));

    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let out = Command::new(env!("CARGO_BIN_EXE_textclust"))
        .args(["pipeline", "--oracle", "http", "--url", &url, "--budget", "60", "--retries", "0"])
        .args(base)
        .env("OPENAI_API_KEY", "dummy")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("query stage failed"));
}
