use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use scd_core::{load_corpus, Corpus, InfluenceProfile, IngestConfig};
use scd_eval::report::{
    read_metrics, read_reduction, write_models, write_tables, METRICS_FILE, REDUCTION_FILE,
};
use scd_eval::{plot, run_workflow, synthetic_corpus, EvalError, SyntheticSpec, WorkflowConfig};

#[derive(Parser)]
#[command(
    name = "scd-eval",
    about = "Faulty/refreshed/baseline comparison of SCD models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the workflow for every K and write tables and models.
    Run(RunArgs),
    /// Render SVG charts from the tables in a run directory.
    Plot {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Text file, directory of .txt files, or XML law.
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    corpus: Option<PathBuf>,
    /// Use the built-in three-topic corpus instead.
    #[arg(long)]
    synthetic: bool,
    #[arg(long)]
    ingest_config: Option<PathBuf>,
    /// Comma-separated target SCD counts.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0.125)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pairs at or above this cosine similarity are not injected.
    #[arg(long, default_value_t = scd_eval::DEFAULT_DISSIMILARITY_CAP)]
    cap: f64,
    #[arg(long, default_value = "constant")]
    profile: InfluenceProfile,
    #[arg(long)]
    out: PathBuf,
    /// Skip writing the three model files per K.
    #[arg(long)]
    no_models: bool,
}

fn corpus(args: &RunArgs) -> Result<Corpus, EvalError> {
    if args.synthetic {
        return Ok(synthetic_corpus(SyntheticSpec::default()));
    }
    let ingest = match &args.ingest_config {
        Some(p) => std::fs::read_to_string(p)?.parse()?,
        None => IngestConfig::default(),
    };
    let path = args.corpus.as_ref().expect("clap enforces a source");
    Ok(load_corpus(path, &ingest)?)
}

fn run(args: RunArgs) -> Result<(), EvalError> {
    let corpus = corpus(&args)?;
    tracing::info!(
        documents = corpus.documents().len(),
        sentences = corpus.sentence_count(),
        words = corpus.vocabulary().len(),
        "corpus loaded"
    );
    let mut rows = Vec::new();
    for &k in &args.k {
        let started = Instant::now();
        let cfg = WorkflowConfig {
            k,
            fraction: args.fraction,
            seed: args.seed,
            cap: args.cap,
            profile: args.profile,
        };
        let outcome = run_workflow(&corpus, &cfg)?;
        tracing::info!(
            k,
            elapsed_ms = started.elapsed().as_millis() as u64,
            skipped = outcome.skipped.len(),
            "workflow done"
        );
        if !args.no_models {
            write_models(&args.out, &outcome)?;
        }
        let m = outcome.metrics;
        println!(
            "K={k} pairs={} avg_fb={:.6} avg_fr={:.6} avg_rb={:.6} pd_fb={:.4} pd_fr={:.4} pd_rb={:.4}",
            outcome.pairs.len(),
            m.avg_fb,
            m.avg_fr,
            m.avg_rb,
            m.pd_fb,
            m.pd_fr,
            m.pd_rb
        );
        rows.push(m);
    }
    write_tables(&args.out, &rows)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let result = match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Plot { dir } => read_metrics(&dir.join(METRICS_FILE)).and_then(|m| {
            let r = read_reduction(&dir.join(REDUCTION_FILE))?;
            plot::plot_sweep(&dir, &m, &r)
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
