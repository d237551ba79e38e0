use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use electoral_forge::dataset::{
    average_polls_by_cycle, join_sources, load_outcomes, load_polls, load_table, FeatureGroup,
    CENSUS_COLUMNS, ECONOMIC_COLUMNS,
};
use electoral_forge::electoral::{tally, ElectoralTable, ElectoralTally};
use electoral_forge::evaluation::{
    classification_rows, cv_rows, kfold_cv, roc, roc_rows, temporal_eval,
    write_classification_report, write_cv_report, write_roc, TemporalReport,
};
use electoral_forge::learners::{self, feature_importance, ModelKind};
use electoral_forge::sentiment::{
    aggregate, load_tweets, to_features, write_aggregates, AggregationReport, Gazetteer,
    KeywordTable, SentimentContext,
};
use electoral_forge::{Dataset, ElectionYear, PartyLabel, StateId};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{CliError, Command};

pub const SENTIMENT_FILE: &str = "sentiment.csv";
pub const SKIP_REPORT_FILE: &str = "skip_report.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const CV_REPORT_FILE: &str = "cv_report.csv";
pub const CV_ABLATED_FILE: &str = "cv_report_ablated.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const CLASSIFICATION_FILE: &str = "classification_report.csv";
pub const TALLY_FILE: &str = "tally.json";
pub const ROC_FILE: &str = "roc.csv";
pub const IMPORTANCE_FILE: &str = "importance.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const SUMMARY_HEADER: [&str; 5] = [
    "model",
    "threshold",
    "accuracy",
    "dnc_electors",
    "gop_electors",
];

fn year(y: u16) -> ElectionYear {
    ElectionYear::new(y).expect("supported cycle")
}

/// Wraps a module error with the stage it came from.
fn at<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Stage {
        stage,
        message: e.to_string(),
    }
}

fn create(path: &Path, stage: &'static str) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Stage {
            stage,
            message: format!("{}: {e}", path.display()),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTally {
    pub model: ModelKind,
    #[serde(flatten)]
    pub tally: ElectoralTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub threshold: f64,
    pub accuracy: f64,
    pub dnc_electors: u32,
    pub gop_electors: u32,
}

/// One state's modal label and mean p_gop under each model.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub state: StateId,
    pub actual: PartyLabel,
    pub by_model: Vec<(PartyLabel, f64)>,
}

/// Wide table: `state,actual` then `<model>,<model>_p_gop` per model.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    pub models: Vec<ModelKind>,
    pub rows: Vec<PredictionRow>,
}

impl PredictionTable {
    fn from_reports(reports: &[(ModelKind, TemporalReport)]) -> Self {
        let models = reports.iter().map(|(k, _)| *k).collect();
        let first = &reports[0].1.predictions;
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, p)| PredictionRow {
                state: p.state,
                actual: p.actual,
                by_model: reports
                    .iter()
                    .map(|(_, r)| (r.predictions[i].predicted, r.predictions[i].mean_p_gop))
                    .collect(),
            })
            .collect();
        PredictionTable { models, rows }
    }

    pub fn winners(&self, model: usize) -> BTreeMap<StateId, PartyLabel> {
        self.rows
            .iter()
            .map(|r| (r.state, r.by_model[model].0))
            .collect()
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["state".to_string(), "actual".to_string()];
        for m in &self.models {
            header.push(m.to_string());
            header.push(format!("{m}_p_gop"));
        }
        wtr.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.state.code().to_string(), r.actual.to_string()];
            for (label, p) in &r.by_model {
                rec.push(label.to_string());
                rec.push(p.to_string());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        let cols: Vec<&str> = header.iter().collect();
        if cols.len() < 4 || cols[..2] != ["state", "actual"] || !cols.len().is_multiple_of(2) {
            return Err(format!("unexpected predictions header: {}", cols.join(",")));
        }
        let mut models = Vec::new();
        for pair in cols[2..].chunks(2) {
            let kind: ModelKind = pair[0]
                .parse()
                .map_err(|e: learners::LearnerError| e.to_string())?;
            if pair[1] != format!("{kind}_p_gop") {
                return Err(format!("expected {kind}_p_gop, found {}", pair[1]));
            }
            models.push(kind);
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let state = StateId::parse(field(0)).map_err(|e| e.to_string())?;
            let actual: PartyLabel = field(1)
                .parse()
                .map_err(|e: electoral_forge::dataset::DatasetError| e.to_string())?;
            let mut by_model = Vec::new();
            for m in 0..models.len() {
                let label: PartyLabel = field(2 + 2 * m)
                    .parse()
                    .map_err(|e: electoral_forge::dataset::DatasetError| e.to_string())?;
                let p: f64 = field(3 + 2 * m)
                    .parse()
                    .map_err(|_| format!("bad p_gop for {state}"))?;
                by_model.push((label, p));
            }
            rows.push(PredictionRow {
                state,
                actual,
                by_model,
            });
        }
        Ok(PredictionTable { models, rows })
    }
}

pub fn write_summary<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    wtr.write_record(SUMMARY_HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(reader: R) -> Result<Vec<SummaryRow>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub struct Pipeline {
    config: RunConfig,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Self {
        Pipeline { config }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    pub fn run(&self, command: Command) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.config.output_dir).map_err(at("output"))?;
        match command {
            Command::AggregateSentiment => self.write_sentiment(&self.sentiment()?),
            Command::BuildFeatures => self.write_features(&self.dataset()?),
            Command::CrossValidate => self.cross_validate(&self.dataset()?, CV_REPORT_FILE),
            Command::Evaluate2020 => {
                let reports = self.evaluate(&self.dataset()?)?;
                self.write_evaluation(&reports).map(|_| ())
            }
            Command::Roc => self.write_roc(&self.evaluate(&self.dataset()?)?),
            Command::Tally => self.tally_predictions().map(|_| ()),
            Command::ReportAll => self.report_all(),
        }
    }

    fn report_all(&self) -> Result<(), CliError> {
        let sentiment = self.sentiment()?;
        self.write_sentiment(&sentiment)?;
        let ds = self.join(&sentiment)?;
        self.write_features(&ds)?;
        self.cross_validate(&ds, CV_REPORT_FILE)?;
        if ds.schema().has_group(FeatureGroup::Sentiment) {
            let ablated = ds
                .without_group(FeatureGroup::Sentiment)
                .map_err(at("cross-validate"))?;
            self.cross_validate(&ablated, CV_ABLATED_FILE)?;
        }
        let reports = self.evaluate(&ds)?;
        let tallies = self.write_evaluation(&reports)?;
        self.write_roc(&reports)?;
        self.write_importance(&ds)?;

        let rows: Vec<SummaryRow> = reports
            .iter()
            .zip(&tallies)
            .map(|((kind, r), t)| SummaryRow {
                model: *kind,
                threshold: self.config.threshold,
                accuracy: r.mean_accuracy,
                dnc_electors: t.tally.dnc_votes,
                gop_electors: t.tally.gop_votes,
            })
            .collect();
        write_summary(create(&self.out(SUMMARY_FILE), "report")?, &rows).map_err(at("report"))?;
        log::info!("[report] wrote {} summary rows", rows.len());
        Ok(())
    }

    fn sentiment(&self) -> Result<AggregationReport, CliError> {
        const STAGE: &str = "aggregate-sentiment";
        let mut context = SentimentContext::default();
        if let Some(p) = &self.config.keywords {
            context.keywords = KeywordTable::load(p).map_err(at(STAGE))?;
        }
        if let Some(p) = &self.config.gazetteer {
            context.gazetteer = Gazetteer::load(p).map_err(at(STAGE))?;
        }
        let tweets = load_tweets(&self.config.inputs.tweets).map_err(at(STAGE))?;
        let report = aggregate(&tweets, &context);
        log::info!(
            "[{STAGE}] {} tweets, {} retained, {} groups",
            tweets.len(),
            report.retained,
            report.aggregates.len()
        );
        Ok(report)
    }

    fn write_sentiment(&self, report: &AggregationReport) -> Result<(), CliError> {
        const STAGE: &str = "aggregate-sentiment";
        write_aggregates(
            create(&self.out(SENTIMENT_FILE), STAGE)?,
            &report.aggregates,
        )
        .map_err(at(STAGE))?;
        let mut wtr = csv::Writer::from_writer(create(&self.out(SKIP_REPORT_FILE), STAGE)?);
        wtr.write_record(["reason", "count"]).map_err(at(STAGE))?;
        for (reason, n) in &report.skipped {
            wtr.write_record([reason.as_str(), &n.to_string()])
                .map_err(at(STAGE))?;
        }
        wtr.flush().map_err(at(STAGE))
    }

    fn dataset(&self) -> Result<Dataset, CliError> {
        let sentiment = if self.config.schema()?.has_group(FeatureGroup::Sentiment) {
            self.sentiment()?
        } else {
            AggregationReport {
                aggregates: Vec::new(),
                skipped: BTreeMap::new(),
                retained: 0,
            }
        };
        self.join(&sentiment)
    }

    fn join(&self, sentiment: &AggregationReport) -> Result<Dataset, CliError> {
        const STAGE: &str = "build-features";
        let schema = self.config.schema()?;
        let inputs = &self.config.inputs;
        let census_cols: Vec<&str> = CENSUS_COLUMNS
            .iter()
            .map(|(n, _)| *n)
            .filter(|n| schema.index_of(n).is_some())
            .collect();
        let econ_cols: Vec<&str> = ECONOMIC_COLUMNS
            .iter()
            .copied()
            .filter(|n| schema.index_of(n).is_some())
            .collect();
        let census = load_table(&inputs.census, &census_cols).map_err(at(STAGE))?;
        let economy = load_table(&inputs.economy, &econ_cols).map_err(at(STAGE))?;
        let polls = average_polls_by_cycle(&load_polls(&inputs.polls).map_err(at(STAGE))?);
        let outcomes = load_outcomes(&inputs.outcomes).map_err(at(STAGE))?;
        let features = to_features(&sentiment.aggregates);
        let ds = join_sources(&census, &economy, &polls, &features, &outcomes, &schema)
            .map_err(at(STAGE))?;
        log::info!("[{STAGE}] {} rows × {} features", ds.len(), schema.len());
        Ok(ds)
    }

    fn write_features(&self, ds: &Dataset) -> Result<(), CliError> {
        ds.write_csv(create(&self.out(FEATURES_FILE), "build-features")?)
            .map_err(at("build-features"))
    }

    fn cross_validate(&self, ds: &Dataset, file: &str) -> Result<(), CliError> {
        const STAGE: &str = "cross-validate";
        let policy = self.config.policy();
        let mut rows = Vec::new();
        for &kind in &self.config.models {
            let spec = self.config.model_spec(kind)?;
            let cv = kfold_cv(ds, self.config.cv.k, &spec, self.config.fold_seed(), policy)
                .map_err(at(STAGE))?;
            log::info!("[{STAGE}] {file} {kind}: {:.4}", cv.mean_accuracy);
            rows.extend(cv_rows(kind.as_str(), &cv));
        }
        write_cv_report(create(&self.out(file), STAGE)?, &rows).map_err(at(STAGE))
    }

    fn evaluate(&self, ds: &Dataset) -> Result<Vec<(ModelKind, TemporalReport)>, CliError> {
        const STAGE: &str = "evaluate-2020";
        let mut out = Vec::new();
        for &kind in &self.config.models {
            let spec = self.config.model_spec(kind)?;
            let r = temporal_eval(
                ds,
                &[year(2012), year(2016)],
                year(2020),
                &spec,
                self.config.policy(),
                self.config.cv.repeats,
            )
            .map_err(at(STAGE))?;
            log::info!("[{STAGE}] {kind}: {:.4}", r.mean_accuracy);
            out.push((kind, r));
        }
        Ok(out)
    }

    fn electoral_table(&self) -> Result<ElectoralTable, CliError> {
        match &self.config.electoral_votes {
            Some(p) => ElectoralTable::load(p, 2010).map_err(at("tally")),
            None => Ok(ElectoralTable::bundled()),
        }
    }

    fn write_evaluation(
        &self,
        reports: &[(ModelKind, TemporalReport)],
    ) -> Result<Vec<ModelTally>, CliError> {
        const STAGE: &str = "evaluate-2020";
        let table = PredictionTable::from_reports(reports);
        table
            .write(create(&self.out(PREDICTIONS_FILE), STAGE)?)
            .map_err(at(STAGE))?;

        let mut thresholds = vec![0.5];
        if self.config.threshold != 0.5 {
            thresholds.push(self.config.threshold);
        }
        let mut rows = Vec::new();
        for (kind, r) in reports {
            for &t in &thresholds {
                let policy = learners::DecisionPolicy::new(t).map_err(at(STAGE))?;
                let relabeled = r.with_policy(policy);
                rows.extend(classification_rows(kind.as_str(), t, &relabeled.modal));
            }
        }
        write_classification_report(create(&self.out(CLASSIFICATION_FILE), STAGE)?, &rows)
            .map_err(at(STAGE))?;
        self.write_tallies(&table)
    }

    fn write_tallies(&self, table: &PredictionTable) -> Result<Vec<ModelTally>, CliError> {
        const STAGE: &str = "tally";
        let electors = self.electoral_table()?;
        let mut tallies = Vec::new();
        for (i, kind) in table.models.iter().enumerate() {
            let t = tally(&table.winners(i), &electors).map_err(at(STAGE))?;
            log::info!("[{STAGE}] {kind}: DNC {} GOP {}", t.dnc_votes, t.gop_votes);
            tallies.push(ModelTally {
                model: *kind,
                tally: t,
            });
        }
        let mut w = create(&self.out(TALLY_FILE), STAGE)?;
        serde_json::to_writer_pretty(&mut w, &tallies).map_err(at(STAGE))?;
        w.write_all(b"\n").map_err(at(STAGE))?;
        w.flush().map_err(at(STAGE))?;
        Ok(tallies)
    }

    fn tally_predictions(&self) -> Result<Vec<ModelTally>, CliError> {
        let path = self.out(PREDICTIONS_FILE);
        let file = File::open(&path).map_err(|e| CliError::Stage {
            stage: "tally",
            message: format!("{}: {e}", path.display()),
        })?;
        let table = PredictionTable::read(file).map_err(at("tally"))?;
        self.write_tallies(&table)
    }

    fn write_roc(&self, reports: &[(ModelKind, TemporalReport)]) -> Result<(), CliError> {
        const STAGE: &str = "roc";
        let mut rows = Vec::new();
        for (kind, r) in reports {
            let scores: Vec<f64> = r.predictions.iter().map(|p| p.mean_p_gop).collect();
            let truth: Vec<PartyLabel> = r.predictions.iter().map(|p| p.actual).collect();
            let curve = roc(&scores, &truth).map_err(at(STAGE))?;
            log::info!("[{STAGE}] {kind}: AUC {:.4}", curve.auc);
            rows.extend(roc_rows(kind.as_str(), &curve));
        }
        write_roc(create(&self.out(ROC_FILE), STAGE)?, &rows).map_err(at(STAGE))
    }

    /// Importances of the tree-family models fit on the training cycles.
    fn write_importance(&self, ds: &Dataset) -> Result<(), CliError> {
        const STAGE: &str = "importance";
        let train = ds.filter_years(&[year(2012), year(2016)]);
        let mut wtr = csv::Writer::from_writer(create(&self.out(IMPORTANCE_FILE), STAGE)?);
        wtr.write_record(["model", "feature", "importance"])
            .map_err(at(STAGE))?;
        for &kind in self.config.models.iter().filter(|k| k.is_tree_family()) {
            let spec = self.config.model_spec(kind)?;
            let model =
                learners::fit(&spec, &train.matrix(), &train.labels()).map_err(at(STAGE))?;
            let report = feature_importance(&model).map_err(at(STAGE))?;
            if report.degenerate {
                log::warn!("[{STAGE}] {kind}: no split had positive gain");
            }
            for (feature, v) in &report.entries {
                wtr.write_record([kind.as_str(), feature, &v.to_string()])
                    .map_err(at(STAGE))?;
            }
        }
        wtr.flush().map_err(at(STAGE))
    }
}
