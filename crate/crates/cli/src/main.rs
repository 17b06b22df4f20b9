//! `lrp`: the local-ranking experiment pipeline.
//!
//! ```text
//! lrp synth → ingest → extract → pagerank | tau-matrix | surfer | rings
//!                               → features | jackknife → train → report
//! ```

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Experiments on local PageRank over referrer browse graphs.
#[derive(Debug, Parser)]
#[command(name = "lrp", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags accepted by every subcommand. Flags override `--config`.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (TOML); missing keys keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $LRP_OUT_DIR, then ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Damping factor.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic pageview log with ground truth.
    Synth(commands::SynthArgs),
    /// Parse, filter and sessionize a pageview log.
    Ingest(commands::IngestArgs),
    /// Build referrer subgraphs and the full graph from sessions.
    Extract(commands::ExtractArgs),
    /// PageRank of every graph.
    Pagerank(commands::PagerankArgs),
    /// Pairwise Kendall tau of the graphs' PageRanks.
    TauMatrix(commands::TauMatrixArgs),
    /// Referrer identification from random-surfer likelihoods.
    Surfer(commands::SurferArgs),
    /// Growing rings from each referrer graph toward the global graph.
    Rings(commands::RingsArgs),
    /// Structural feature vectors, or the feature schema.
    Features(commands::FeaturesArgs),
    /// Jackknife training set of reduced graphs and their taus.
    Jackknife(commands::JackknifeArgs),
    /// Cross-validate and train the tau regressor, with importances.
    #[command(alias = "predict-tau")]
    Train(commands::TrainArgs),
    /// Rank referrer graphs by predicted tau against their true tau.
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(&cli.common, a),
        Command::Ingest(a) => commands::ingest(&cli.common, a),
        Command::Extract(a) => commands::extract(&cli.common, a),
        Command::Pagerank(a) => commands::pagerank(&cli.common, a),
        Command::TauMatrix(a) => commands::tau_matrix(&cli.common, a),
        Command::Surfer(a) => commands::surfer(&cli.common, a),
        Command::Rings(a) => commands::rings(&cli.common, a),
        Command::Features(a) => commands::features(&cli.common, a),
        Command::Jackknife(a) => commands::jackknife(&cli.common, a),
        Command::Train(a) => commands::train(&cli.common, a),
        Command::Report(a) => commands::report(&cli.common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
