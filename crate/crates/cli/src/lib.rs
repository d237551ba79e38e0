//! End-to-end forecasting pipeline driven by a JSON run config.

mod config;
mod pipeline;

use std::path::Path;

use electoral_forge::synthetic::{self, SyntheticConfig, SyntheticElection};
use thiserror::Error;

pub use config::{resolve_config, validate_config, CvSettings, Inputs, RunConfig, SEED_ENV};
pub use pipeline::{
    read_summary, write_summary, ModelTally, Pipeline, PredictionRow, PredictionTable, SummaryRow,
    CLASSIFICATION_FILE, CV_ABLATED_FILE, CV_REPORT_FILE, FEATURES_FILE, IMPORTANCE_FILE,
    PREDICTIONS_FILE, ROC_FILE, SENTIMENT_FILE, SKIP_REPORT_FILE, SUMMARY_FILE, SUMMARY_HEADER,
    TALLY_FILE,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("{stage}: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
}

impl CliError {
    /// One-line JSON error record.
    pub fn record(&self) -> serde_json::Value {
        match self {
            CliError::ConfigInvalid(detail) => serde_json::json!({
                "error": "config_invalid",
                "stage": "config",
                "message": detail,
            }),
            CliError::Stage { stage, message } => serde_json::json!({
                "error": "stage_failed",
                "stage": stage,
                "message": message,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    AggregateSentiment,
    BuildFeatures,
    CrossValidate,
    Evaluate2020,
    Roc,
    Tally,
    ReportAll,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::AggregateSentiment,
        Command::BuildFeatures,
        Command::CrossValidate,
        Command::Evaluate2020,
        Command::Roc,
        Command::Tally,
        Command::ReportAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::AggregateSentiment => "aggregate-sentiment",
            Command::BuildFeatures => "build-features",
            Command::CrossValidate => "cross-validate",
            Command::Evaluate2020 => "evaluate-2020",
            Command::Roc => "roc",
            Command::Tally => "tally",
            Command::ReportAll => "report-all",
        }
    }
}

pub fn run_pipeline(config: RunConfig, command: Command) -> Result<(), CliError> {
    log::info!("[{}] start", command.as_str());
    Pipeline::new(config).run(command)?;
    log::info!("[{}] done", command.as_str());
    Ok(())
}

/// Writes a synthetic election into `dir` with a `config.json` pointing at it.
pub fn generate_fixture(
    dir: &Path,
    config: &SyntheticConfig,
) -> Result<SyntheticElection, CliError> {
    let election = SyntheticElection::generate(config);
    election.write_to(dir).map_err(|e| CliError::Stage {
        stage: "generate-fixture",
        message: e.to_string(),
    })?;
    let run = serde_json::json!({
        "inputs": {
            "census": synthetic::CENSUS_FILE,
            "economy": synthetic::ECONOMY_FILE,
            "polls": synthetic::POLLS_FILE,
            "tweets": synthetic::TWEETS_FILE,
            "outcomes": synthetic::OUTCOMES_FILE,
        },
        "cv": { "seed": config.seed },
    });
    let text = serde_json::to_string_pretty(&run).expect("config serializes") + "\n";
    std::fs::write(dir.join("config.json"), text).map_err(|e| CliError::Stage {
        stage: "generate-fixture",
        message: e.to_string(),
    })?;
    Ok(election)
}
