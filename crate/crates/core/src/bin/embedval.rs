use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use embedval::config::RunConfig;
use embedval::pipeline::{run, Command};
use embedval::Result;

/// Construct-validity bench for text embeddings of survey questions.
#[derive(Debug, Parser)]
#[command(name = "embedval", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Comma-separated representation names to keep from the manifest.
    #[arg(long, global = true, value_delimiter = ',')]
    reps: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate the question corpus and its summary.
    GenCorpus,
    /// Run the probing classifiers.
    Probe,
    /// Score similarity differences over concept triads.
    Simdiff,
    /// Cross-validate response prediction.
    Predict,
    /// Corpus plus every analysis enabled in the config.
    All,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(reps) = &cli.reps {
        config.retain_representations(reps)?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::GenCorpus => Command::GenCorpus,
        Cmd::Probe => Command::Probe,
        Cmd::Simdiff => Command::Simdiff,
        Cmd::Predict => Command::Predict,
        Cmd::All => Command::All,
    };
    match load_config(&cli).and_then(|config| run(command, &config)) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
