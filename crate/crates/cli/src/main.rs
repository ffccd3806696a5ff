//! `crowdarg`: runs the annotation-campaign pipeline stage by stage.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use crowdarg::metrics::ExpectedMode;
use crowdarg::pipeline::{run, run_all, PipelineConfig, PipelineError, Stage};

#[derive(Debug, Parser)]
#[command(
    name = "crowdarg",
    version,
    about = "Reliability, quality control and aggregation for crowdsourced argument annotations"
)]
struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Campaign directory (one subdirectory per document).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Directory receiving the artifacts.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for simulation and randomized expected disagreement.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    easy_threshold: Option<f64>,
    #[arg(long, global = true)]
    sentence_threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every annotation set against the argumentation model.
    Validate,
    /// Per-document agreement (%, multi-pi, alpha, unitized alpha).
    Agreement,
    /// Score annotators on gold documents and remove less-devoted ones.
    Filter,
    /// Consensus annotation of every retained document.
    Aggregate,
    /// Easy-review and less-controversial-sentence corpora.
    Build,
    /// Confusion probability matrices for both corpora.
    Cpm,
    /// Generate a synthetic campaign into the input directory.
    Simulate,
    /// Collect every table into one summary.
    Report,
    /// Run validate through report in order.
    Run,
    /// Print the effective configuration as TOML.
    Config,
}

fn config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(input) = &cli.input {
        config.input = input.clone();
    }
    if let Some(output) = &cli.output {
        config.output = output.clone();
    }
    if let Some(seed) = cli.seed {
        config.simulate.seed = seed;
        if let ExpectedMode::Randomization { seed: s, .. } = &mut config.alpha_u.expected {
            *s = seed;
        }
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(t) = cli.easy_threshold {
        config.thresholds.easy_threshold = t;
    }
    if let Some(t) = cli.sentence_threshold {
        config.thresholds.sentence_threshold = t;
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let config = config(cli)?;
    let stage = match cli.command {
        Command::Validate => Stage::Validate,
        Command::Agreement => Stage::Agreement,
        Command::Filter => Stage::Filter,
        Command::Aggregate => Stage::Aggregate,
        Command::Build => Stage::Build,
        Command::Cpm => Stage::Cpm,
        Command::Simulate => Stage::Simulate,
        Command::Report => Stage::Report,
        Command::Run => return run_all(&config).context("pipeline failed"),
        Command::Config => {
            print!("{}", config.to_toml());
            return Ok(());
        }
    };
    run(stage, &config).with_context(|| format!("stage `{stage}` failed"))?;
    log::info!("stage `{stage}` wrote its artifacts to {}", config.output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<PipelineError>().map_or(1, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
