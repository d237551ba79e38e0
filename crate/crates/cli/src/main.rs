use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use electoral_forge::synthetic::SyntheticConfig;
use electoral_forge_cli::{
    generate_fixture, resolve_config, run_pipeline, CliError, Command, SEED_ENV,
};

#[derive(Parser)]
#[command(
    name = "electoral-forge",
    version,
    about = "State-level election forecasting pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dotted override, e.g. `--set cv.k=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    AggregateSentiment(RunArgs),
    BuildFeatures(RunArgs),
    CrossValidate(RunArgs),
    #[command(name = "evaluate-2020")]
    Evaluate2020(RunArgs),
    Roc(RunArgs),
    Tally(RunArgs),
    ReportAll(RunArgs),
    /// Write a synthetic election and a matching config.json.
    GenerateFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Cmd::AggregateSentiment(a) => (Command::AggregateSentiment, a),
        Cmd::BuildFeatures(a) => (Command::BuildFeatures, a),
        Cmd::CrossValidate(a) => (Command::CrossValidate, a),
        Cmd::Evaluate2020(a) => (Command::Evaluate2020, a),
        Cmd::Roc(a) => (Command::Roc, a),
        Cmd::Tally(a) => (Command::Tally, a),
        Cmd::ReportAll(a) => (Command::ReportAll, a),
        Cmd::GenerateFixture { out, seed } => {
            let config = SyntheticConfig {
                seed,
                ..SyntheticConfig::default()
            };
            generate_fixture(&out, &config)?;
            log::info!("[generate-fixture] wrote {}", out.display());
            return Ok(());
        }
    };
    let seed = std::env::var(SEED_ENV).ok();
    let mut config = resolve_config(&args.config, &args.set, seed.as_deref())?;
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    run_pipeline(config, command)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("{}", e.record());
            ExitCode::FAILURE
        }
    }
}
