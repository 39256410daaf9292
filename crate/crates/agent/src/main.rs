use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use clap::{Parser, Subcommand};
use scd_agent::service::router;
use scd_agent::ServiceConfig;
use scd_core::{load_corpus, InfluenceProfile, IngestConfig, MergeConfig};

#[derive(Parser)]
#[command(name = "scd-agent", version, about = "SCD-based retrieval agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build a model file from a corpus with unsupervised estimation.
    BuildModel {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "constant")]
        profile: InfluenceProfile,
        #[arg(long)]
        ingest_config: Option<PathBuf>,
    },
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match Cli::parse().command {
        Command::Serve { config } => {
            let cfg = ServiceConfig::load(&config)?;
            let agent = cfg.build_agent()?;
            tracing::info!(
                scds = agent.model().scd_count(),
                sentences = agent.model().corpus().sentence_count(),
                version = agent.model().version(),
                "model loaded"
            );
            let app = router(Arc::new(RwLock::new(agent)));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&cfg.bind).await?;
                tracing::info!(bind = %cfg.bind, "listening");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
        }
        Command::BuildModel {
            corpus,
            k,
            out,
            profile,
            ingest_config,
        } => {
            let ingest = match ingest_config {
                Some(p) => std::fs::read_to_string(p)?.parse()?,
                None => IngestConfig::default(),
            };
            let corpus = load_corpus(&corpus, &ingest)?;
            let model = scd_core::estimate_usem(corpus, &MergeConfig::new(k), profile)?;
            model.write_to(&out)?;
            println!(
                "{} documents, {} sentences, {} words, {} SCDs -> {}",
                model.corpus().documents().len(),
                model.corpus().sentence_count(),
                model.corpus().vocabulary().len(),
                model.scd_count(),
                out.display()
            );
        }
    }
    Ok(())
}
