use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use textclust::synthetic::{generate, SyntheticSpec};
use textclust::{io, pipeline, PipelineConfig, Result};

/// Budgeted pair/triplet constraint acquisition and weighted constrained
/// clustering of text embeddings.
#[derive(Parser)]
#[command(name = "textclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pick the pairs or triplets to ask about under the token budget.
    Select(StageArgs),
    /// Ask the oracle about the selection and write constraints.
    Query(StageArgs),
    /// Cluster with the configured method and evaluate against labels.
    Cluster(StageArgs),
    /// Run select, query and cluster end to end.
    Pipeline(StageArgs),
    /// Write a synthetic labeled corpus with embeddings.
    Synth(SynthArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    embeddings: Option<String>,
    /// Directory for artifacts without an explicit path.
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    constraints: Option<String>,
    /// Token budget Q, as a count or a percentage of the corpus size.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    /// `edge` or `triangle`.
    #[arg(long)]
    mode: Option<String>,
    /// `mock`, `http` or `cached`.
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    url: Option<String>,
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long)]
    temperature: Option<String>,
    #[arg(long)]
    replay_kind: Option<String>,
    /// Prompt wording preset, e.g. `bbc_news` or `clinc`.
    #[arg(long)]
    template: Option<String>,
    /// `pmi`, `ess`, `sess`, `less`, `sec`, `ssec`, `ipmi` or `none`.
    #[arg(long)]
    weighting: Option<String>,
    /// `wcsc`, `wckmeans`, `kmeans` or `spectral`.
    #[arg(long)]
    clusterer: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    noise_rate: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    parallelism: Option<String>,
    #[arg(long)]
    retries: Option<String>,
    /// Replay cache file.
    #[arg(long)]
    cache: Option<String>,
    /// Write the WCSC operators as binary matrices.
    #[arg(long)]
    dump_operators: bool,
}

impl StageArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        let flags = [
            ("corpus", &self.corpus),
            ("embeddings", &self.embeddings),
            ("output", &self.output),
            ("selection", &self.selection),
            ("constraints", &self.constraints),
            ("budget", &self.budget),
            ("clusters", &self.clusters),
            ("mode", &self.mode),
            ("oracle", &self.oracle),
            ("model", &self.model),
            ("url", &self.url),
            ("api_key_env", &self.api_key_env),
            ("temperature", &self.temperature),
            ("replay_kind", &self.replay_kind),
            ("template", &self.template),
            ("weighting", &self.weighting),
            ("clusterer", &self.clusterer),
            ("alpha", &self.alpha),
            ("max_iters", &self.max_iters),
            ("noise_rate", &self.noise_rate),
            ("seed", &self.seed),
            ("parallelism", &self.parallelism),
            ("retries", &self.retries),
            ("cache", &self.cache),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if self.dump_operators {
            config.dump_operators = true;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 0.35)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `corpus.jsonl` and `embeddings.bin`.
    #[arg(long)]
    out: PathBuf,
}

fn print<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select(a) => print(&pipeline::cmd_select(&a.resolve()?)?),
        Command::Query(a) => print(&pipeline::cmd_query(&a.resolve()?)?),
        Command::Cluster(a) => print(&pipeline::cmd_cluster(&a.resolve()?)?),
        Command::Pipeline(a) => print(&pipeline::cmd_pipeline(&a.resolve()?)?),
        Command::Synth(a) => {
            if a.k == 0 || a.n < a.k || a.dim == 0 {
                return Err(textclust::Error::Config("need 0 < k <= n and dim > 0".into()));
            }
            let data = generate(&SyntheticSpec {
                n: a.n,
                k: a.k,
                dim: a.dim,
                sigma: a.sigma,
                seed: a.seed,
            });
            io::write_corpus(&a.out.join("corpus.jsonl"), &data.texts)?;
            io::write_embeddings_binary(&a.out.join("embeddings.bin"), &data.rows)?;
            println!("wrote {} texts to {}", data.texts.len(), a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
