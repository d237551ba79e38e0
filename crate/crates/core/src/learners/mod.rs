//! The seven classifiers and the soft-voting ensemble behind one contract:
//! fit on a feature matrix and party labels, predict (p_dnc, p_gop) pairs.
//! GOP is the positive class throughout.

mod boosting;
mod forest;
mod logistic;
mod mlp;
mod naive_bayes;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::PartyLabel;
use crate::matrix::FeatureMatrix;
use crate::seed;

pub use boosting::{BoostingParams, GradientBoosting};
pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticParams, LogisticRegression};
pub use mlp::{Layer, Mlp, MlpParams};
pub use naive_bayes::{GaussianNb, NaiveBayesParams};
pub use svm::{LinearSvm, PlattScaling, SvmParams};
pub use tree::{Node, Tree};

use tree::{normalize, Criterion, TreeParams};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("{0} needs both classes in the training labels")]
    SingleClassData(ModelKind),
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },
    #[error("invalid hyperparameter {name} for {kind}: {detail}")]
    HyperparameterInvalid {
        kind: ModelKind,
        name: String,
        detail: String,
    },
    #[error("schema mismatch: model trained on {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("{0} does not support this operation")]
    UnsupportedKind(ModelKind),
    #[error("no training rows")]
    Empty,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("threshold {0} outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
    #[error("model file: {0}")]
    Serialization(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree,
    RandomForest,
    GradientBoosting,
    LogisticRegression,
    Svm,
    GaussianNb,
    Mlp,
    Voting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::LogisticRegression,
        ModelKind::Svm,
        ModelKind::GaussianNb,
        ModelKind::Mlp,
        ModelKind::Voting,
    ];

    /// Members of the default voting ensemble.
    pub const VOTING_MEMBERS: [ModelKind; 6] = [
        ModelKind::GradientBoosting,
        ModelKind::LogisticRegression,
        ModelKind::Svm,
        ModelKind::RandomForest,
        ModelKind::GaussianNb,
        ModelKind::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::Svm => "svm",
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::Mlp => "mlp",
            ModelKind::Voting => "voting",
        }
    }

    pub fn is_tree_family(self) -> bool {
        matches!(
            self,
            ModelKind::DecisionTree | ModelKind::RandomForest | ModelKind::GradientBoosting
        )
    }

    /// Kinds trained by gradient steps, which expect standardized inputs.
    pub fn is_gradient_trained(self) -> bool {
        matches!(
            self,
            ModelKind::LogisticRegression | ModelKind::Svm | ModelKind::Mlp
        )
    }

    fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::DecisionTree => &[("max_depth", 5.0), ("min_samples_split", 2.0)],
            ModelKind::RandomForest => &[("n_trees", 200.0), ("min_samples_split", 2.0)],
            ModelKind::GradientBoosting => &[
                ("n_stages", 100.0),
                ("learning_rate", 0.1),
                ("max_depth", 3.0),
                ("min_samples_split", 2.0),
                ("newton", 0.0),
            ],
            ModelKind::LogisticRegression => &[("l2", 1e-4), ("max_iter", 10_000.0), ("tol", 1e-6)],
            ModelKind::Svm => &[("lambda", 1e-2), ("epochs", 10_000.0)],
            ModelKind::GaussianNb => &[("var_smoothing", 1e-9)],
            ModelKind::Mlp => &[
                ("hidden_layers", 1.0),
                ("hidden_units", 32.0),
                ("learning_rate", 0.01),
                ("momentum", 0.9),
                ("epochs", 2000.0),
                ("batch_size", 32.0),
            ],
            ModelKind::Voting => &[],
        }
    }

    /// Keys accepted without a default value.
    fn optional(self) -> &'static [&'static str] {
        match self {
            ModelKind::RandomForest => &["max_depth", "max_features"],
            _ => &[],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LearnerError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<ModelSpec>,
}

enum Rule {
    /// Integer ≥ the bound.
    Count(f64),
    /// In (0, 1].
    Rate,
    /// In [0, 1).
    Fraction,
    Positive,
    NonNegative,
    Flag,
}

fn rule(name: &str) -> Rule {
    match name {
        "min_samples_split" => Rule::Count(2.0),
        "max_depth" | "n_trees" | "n_stages" | "max_iter" | "epochs" | "batch_size"
        | "hidden_layers" | "hidden_units" | "max_features" => Rule::Count(1.0),
        "learning_rate" => Rule::Rate,
        "momentum" => Rule::Fraction,
        "lambda" | "tol" => Rule::Positive,
        "l2" | "var_smoothing" => Rule::NonNegative,
        "newton" => Rule::Flag,
        _ => Rule::Positive,
    }
}

impl ModelSpec {
    /// Spec with default hyperparameters. Voting gets its six members, each
    /// seeded from this seed and its kind name.
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        let members = if kind == ModelKind::Voting {
            ModelKind::VOTING_MEMBERS
                .iter()
                .map(|k| ModelSpec::new(*k, seed::derive(seed, &["member", k.as_str()])))
                .collect()
        } else {
            Vec::new()
        };
        ModelSpec {
            kind,
            hyperparameters: kind
                .defaults()
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            seed,
            members,
        }
    }

    /// Sets one hyperparameter, validating name and value.
    pub fn with(mut self, name: &str, value: f64) -> Result<Self, LearnerError> {
        self.hyperparameters.insert(name.to_string(), value);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let invalid = |name: &str, detail: &str| LearnerError::HyperparameterInvalid {
            kind: self.kind,
            name: name.to_string(),
            detail: detail.to_string(),
        };
        for (name, &value) in &self.hyperparameters {
            let known = self.kind.defaults().iter().any(|(k, _)| k == name)
                || self.kind.optional().contains(&name.as_str());
            if !known {
                return Err(invalid(name, "unknown hyperparameter"));
            }
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
            let ok = match rule(name) {
                Rule::Count(min) => value.fract() == 0.0 && value >= min,
                Rule::Rate => value > 0.0 && value <= 1.0,
                Rule::Fraction => (0.0..1.0).contains(&value),
                Rule::Positive => value > 0.0,
                Rule::NonNegative => value >= 0.0,
                Rule::Flag => value == 0.0 || value == 1.0,
            };
            if !ok {
                let detail = match rule(name) {
                    Rule::Count(min) => format!("must be an integer ≥ {min}"),
                    Rule::Rate => "must lie in (0, 1]".into(),
                    Rule::Fraction => "must lie in [0, 1)".into(),
                    Rule::Positive => "must be positive".into(),
                    Rule::NonNegative => "must be non-negative".into(),
                    Rule::Flag => "must be 0 or 1".into(),
                };
                return Err(invalid(name, &detail));
            }
        }
        if self.kind == ModelKind::Voting {
            if self.members.is_empty() {
                return Err(invalid("members", "voting needs at least one member"));
            }
            for m in &self.members {
                if m.kind == ModelKind::Voting {
                    return Err(invalid("members", "voting members cannot vote"));
                }
                m.validate()?;
            }
        } else if !self.members.is_empty() {
            return Err(invalid("members", "only voting takes members"));
        }
        Ok(())
    }

    /// Same spec with a new seed; voting members are reseeded accordingly.
    pub fn reseeded(&self, seed: u64) -> Self {
        ModelSpec {
            kind: self.kind,
            hyperparameters: self.hyperparameters.clone(),
            seed,
            members: self
                .members
                .iter()
                .map(|m| m.reseeded(seed::derive(seed, &["member", m.kind.as_str()])))
                .collect(),
        }
    }

    fn get(&self, name: &str) -> Option<f64> {
        self.hyperparameters.get(name).copied()
    }

    fn count(&self, name: &str) -> usize {
        self.get(name).map_or(0, |v| v as usize)
    }

    fn real(&self, name: &str) -> f64 {
        self.get(name).unwrap_or(f64::NAN)
    }
}

/// Class probabilities for one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proba {
    pub p_dnc: f64,
    pub p_gop: f64,
}

impl Proba {
    pub fn from_gop(p_gop: f64) -> Self {
        let p_gop = p_gop.clamp(0.0, 1.0);
        Proba {
            p_dnc: 1.0 - p_gop,
            p_gop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionPolicy {
    pub threshold: f64,
}

impl Default for DecisionPolicy {
    fn default() -> Self {
        DecisionPolicy { threshold: 0.5 }
    }
}

impl DecisionPolicy {
    pub fn new(threshold: f64) -> Result<Self, LearnerError> {
        if threshold > 0.0 && threshold < 1.0 {
            Ok(DecisionPolicy { threshold })
        } else {
            Err(LearnerError::InvalidThreshold(threshold))
        }
    }

    pub fn decide(&self, p_gop: f64) -> PartyLabel {
        if p_gop >= self.threshold {
            PartyLabel::Gop
        } else {
            PartyLabel::Dnc
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum FittedParams {
    DecisionTree(Tree),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    LogisticRegression(LogisticRegression),
    Svm(LinearSvm),
    GaussianNb(GaussianNb),
    Mlp(Mlp),
    Voting(Vec<TrainedModel>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub final_loss: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub columns: Vec<String>,
    pub fingerprint: String,
    pub diagnostics: Diagnostics,
    pub fitted: FittedParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model parameters are finite")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnerError> {
        serde_json::from_str(text).map_err(|e| LearnerError::Serialization(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LearnerError> {
        std::fs::write(path, self.to_json()).map_err(|e| LearnerError::Serialization(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LearnerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LearnerError::Serialization(e.to_string()))?;
        Self::from_json(&text)
    }

    fn p_gop(&self, row: &[f64]) -> f64 {
        match &self.fitted {
            FittedParams::DecisionTree(t) => t.predict(row),
            FittedParams::RandomForest(f) => f.predict_gop(row),
            FittedParams::GradientBoosting(g) => g.predict_gop(row),
            FittedParams::LogisticRegression(m) => m.predict_gop(row),
            FittedParams::Svm(m) => m.predict_gop(row),
            FittedParams::GaussianNb(m) => m.predict_gop(row),
            FittedParams::Mlp(m) => m.predict_gop(row),
            FittedParams::Voting(members) => {
                members.iter().map(|m| m.p_gop(row)).sum::<f64>() / members.len() as f64
            }
        }
    }
}

fn check_inputs(x: &FeatureMatrix, n_labels: usize) -> Result<(), LearnerError> {
    if x.n_rows() == 0 {
        return Err(LearnerError::Empty);
    }
    if x.n_rows() != n_labels {
        return Err(LearnerError::LengthMismatch {
            rows: x.n_rows(),
            labels: n_labels,
        });
    }
    for (i, row) in x.rows().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(LearnerError::NonFiniteFeature { row: i, column: j });
        }
    }
    Ok(())
}

/// Warns when columns look unstandardized; gradient-trained kinds assume
/// roughly zero-mean, unit-scale inputs.
fn warn_if_unscaled(kind: ModelKind, x: &FeatureMatrix) {
    let n = x.n_rows() as f64;
    for (j, name) in x.columns().iter().enumerate() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if mean.abs() > 5.0 || sd > 5.0 {
            log::warn!("{kind}: column {name} looks unstandardized (mean {mean:.3}, sd {sd:.3})");
            return;
        }
    }
}

/// Trains `spec` on `x` with labels `y`.
pub fn fit(
    spec: &ModelSpec,
    x: &FeatureMatrix,
    y: &[PartyLabel],
) -> Result<TrainedModel, LearnerError> {
    spec.validate()?;
    check_inputs(x, y.len())?;
    let target: Vec<f64> = y.iter().map(|l| l.as_target()).collect();
    let n_gop = y.iter().filter(|l| **l == PartyLabel::Gop).count();
    if spec.kind != ModelKind::GaussianNb && (n_gop == 0 || n_gop == y.len()) {
        return Err(LearnerError::SingleClassData(spec.kind));
    }
    if spec.kind.is_gradient_trained() {
        warn_if_unscaled(spec.kind, x);
    }

    let mut diagnostics = Diagnostics::default();
    let fitted = match spec.kind {
        ModelKind::DecisionTree => {
            let params = TreeParams {
                max_depth: Some(spec.count("max_depth")),
                min_samples_split: spec.count("min_samples_split"),
                max_features: None,
            };
            let mut rng = seed::rng(spec.seed);
            let samples = (0..x.n_rows()).collect();
            FittedParams::DecisionTree(Tree::grow(
                x,
                &target,
                samples,
                params,
                Criterion::Gini,
                &mut rng,
            ))
        }
        ModelKind::RandomForest => {
            let params = ForestParams {
                n_trees: spec.count("n_trees"),
                max_depth: spec.get("max_depth").map(|v| v as usize),
                min_samples_split: spec.count("min_samples_split"),
                max_features: spec.get("max_features").map(|v| v as usize),
            };
            FittedParams::RandomForest(RandomForest::fit(x, &target, &params, spec.seed))
        }
        ModelKind::GradientBoosting => {
            let params = BoostingParams {
                n_stages: spec.count("n_stages"),
                learning_rate: spec.real("learning_rate"),
                max_depth: spec.count("max_depth"),
                min_samples_split: spec.count("min_samples_split"),
                newton: spec.real("newton") == 1.0,
            };
            let m = GradientBoosting::fit(x, &target, &params, spec.seed);
            diagnostics.final_loss = m.train_loss.last().copied();
            diagnostics.iterations = Some(m.stages.len());
            FittedParams::GradientBoosting(m)
        }
        ModelKind::LogisticRegression => {
            let params = LogisticParams {
                l2: spec.real("l2"),
                max_iter: spec.count("max_iter"),
                tol: spec.real("tol"),
            };
            let m = LogisticRegression::fit(x, &target, &params);
            diagnostics.final_loss = Some(m.final_loss);
            diagnostics.iterations = Some(m.iterations);
            FittedParams::LogisticRegression(m)
        }
        ModelKind::Svm => {
            let params = SvmParams {
                lambda: spec.real("lambda"),
                epochs: spec.count("epochs"),
            };
            let m = LinearSvm::fit(x, &target, &params, spec.seed);
            diagnostics.final_loss = Some(m.final_hinge_loss);
            diagnostics.iterations = Some(params.epochs);
            FittedParams::Svm(m)
        }
        ModelKind::GaussianNb => {
            let params = NaiveBayesParams {
                var_smoothing: spec.real("var_smoothing"),
            };
            FittedParams::GaussianNb(GaussianNb::fit(x, &target, &params))
        }
        ModelKind::Mlp => {
            let params = MlpParams {
                hidden: vec![spec.count("hidden_units"); spec.count("hidden_layers")],
                learning_rate: spec.real("learning_rate"),
                momentum: spec.real("momentum"),
                epochs: spec.count("epochs"),
                batch_size: spec.count("batch_size"),
            };
            let m = Mlp::fit(x, &target, &params, spec.seed);
            diagnostics.final_loss = Some(m.final_loss);
            diagnostics.iterations = Some(params.epochs);
            FittedParams::Mlp(m)
        }
        ModelKind::Voting => FittedParams::Voting(
            spec.members
                .iter()
                .map(|m| fit(m, x, y))
                .collect::<Result<_, _>>()?,
        ),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        columns: x.columns().to_vec(),
        fingerprint: x.fingerprint(),
        diagnostics,
        fitted,
    })
}

pub fn predict_proba(model: &TrainedModel, x: &FeatureMatrix) -> Result<Vec<Proba>, LearnerError> {
    let found = x.fingerprint();
    if found != model.fingerprint || x.n_cols() != model.columns.len() {
        return Err(LearnerError::SchemaMismatch {
            expected: model.fingerprint.clone(),
            found,
        });
    }
    Ok(x.rows().map(|r| Proba::from_gop(model.p_gop(r))).collect())
}

pub fn predict_with_policy(
    model: &TrainedModel,
    x: &FeatureMatrix,
    policy: DecisionPolicy,
) -> Result<Vec<PartyLabel>, LearnerError> {
    Ok(predict_proba(model, x)?
        .iter()
        .map(|p| policy.decide(p.p_gop))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    /// Sorted by importance, descending; ties keep column order.
    pub entries: Vec<(String, f64)>,
    /// True when no split had positive gain; all importances are then 0.
    pub degenerate: bool,
}

pub fn feature_importance(model: &TrainedModel) -> Result<ImportanceReport, LearnerError> {
    let raw = match &model.fitted {
        FittedParams::DecisionTree(t) => t.raw_importances(),
        FittedParams::RandomForest(f) => f.raw_importances(),
        FittedParams::GradientBoosting(g) => g.raw_importances(),
        _ => return Err(LearnerError::UnsupportedKind(model.kind())),
    };
    let (values, degenerate) = match normalize(&raw) {
        Some(v) => (v, false),
        None => (vec![0.0; raw.len()], true),
    };
    let mut entries: Vec<(String, f64)> = model.columns.iter().cloned().zip(values).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ImportanceReport {
        entries,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use PartyLabel::{Dnc, Gop};

    fn labels(bits: &[u8]) -> Vec<PartyLabel> {
        bits.iter()
            .map(|&b| if b == 1 { Gop } else { Dnc })
            .collect()
    }

    fn separable() -> (FeatureMatrix, Vec<PartyLabel>) {
        let rows: Vec<_> = (0..24)
            .map(|i| vec![(i as f64 - 11.5) / 6.0, ((i * 5) % 7) as f64 / 7.0 - 0.5])
            .collect();
        let y = labels(&(0..24).map(|i| (i >= 12) as u8).collect::<Vec<_>>());
        (FeatureMatrix::unnamed(&rows), y)
    }

    fn quick(kind: ModelKind) -> ModelSpec {
        let spec = ModelSpec::new(kind, 5);
        match kind {
            ModelKind::Svm => spec.with("epochs", 200.0).unwrap(),
            ModelKind::Mlp => spec.with("epochs", 300.0).unwrap(),
            ModelKind::RandomForest => spec.with("n_trees", 20.0).unwrap(),
            _ => spec,
        }
    }

    #[test]
    fn every_kind_fits_and_gives_valid_probabilities() {
        let (x, y) = separable();
        for kind in ModelKind::ALL {
            let m = fit(&quick(kind), &x, &y).unwrap();
            let probs = predict_proba(&m, &x).unwrap();
            let mut correct = 0;
            for (p, t) in probs.iter().zip(&y) {
                assert!((p.p_dnc + p.p_gop - 1.0).abs() < 1e-9);
                assert!((0.0..=1.0).contains(&p.p_gop));
                correct += (DecisionPolicy::default().decide(p.p_gop) == *t) as usize;
            }
            assert!(correct >= 22, "{kind}: {correct}/24");
        }
    }

    #[test]
    fn json_round_trip_reproduces_predictions() {
        let (x, y) = separable();
        for kind in ModelKind::ALL {
            let m = fit(&quick(kind), &x, &y).unwrap();
            let back = TrainedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m, "{kind}");
            assert_eq!(
                predict_proba(&back, &x).unwrap(),
                predict_proba(&m, &x).unwrap()
            );
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = separable();
        for kind in [ModelKind::RandomForest, ModelKind::Svm, ModelKind::Mlp] {
            assert_eq!(
                fit(&quick(kind), &x, &y).unwrap(),
                fit(&quick(kind), &x, &y).unwrap()
            );
        }
    }

    #[test]
    fn single_class_is_rejected_except_for_naive_bayes() {
        let x = FeatureMatrix::unnamed(&[vec![0.0], vec![1.0]]);
        let y = [Gop, Gop];
        for kind in ModelKind::ALL {
            let r = fit(&ModelSpec::new(kind, 0), &x, &y);
            if kind == ModelKind::GaussianNb {
                let m = r.unwrap();
                assert_eq!(
                    predict_proba(&m, &x).unwrap()[0],
                    Proba {
                        p_dnc: 0.0,
                        p_gop: 1.0
                    }
                );
            } else {
                assert!(matches!(r, Err(LearnerError::SingleClassData(k)) if k == kind));
            }
        }
    }

    #[test]
    fn input_validation() {
        let x = FeatureMatrix::unnamed(&[vec![0.0], vec![f64::NAN]]);
        let r = fit(&ModelSpec::new(ModelKind::DecisionTree, 0), &x, &[Dnc, Gop]);
        assert!(matches!(
            r,
            Err(LearnerError::NonFiniteFeature { row: 1, column: 0 })
        ));
        let x = FeatureMatrix::unnamed(&[vec![0.0]]);
        let r = fit(&ModelSpec::new(ModelKind::DecisionTree, 0), &x, &[Dnc, Gop]);
        assert!(matches!(r, Err(LearnerError::LengthMismatch { .. })));
    }

    #[test]
    fn hyperparameter_validation() {
        let spec = ModelSpec::new(ModelKind::GradientBoosting, 0);
        assert!(spec.clone().with("learning_rate", 1.0).is_ok());
        for (k, v) in [
            ("learning_rate", 0.0),
            ("learning_rate", 1.5),
            ("max_depth", 0.0),
            ("max_depth", 2.5),
            ("newton", 2.0),
            ("depth", 3.0),
        ] {
            assert!(
                matches!(
                    spec.clone().with(k, v),
                    Err(LearnerError::HyperparameterInvalid { .. })
                ),
                "{k}={v}"
            );
        }
        assert!(ModelSpec::new(ModelKind::RandomForest, 0)
            .with("max_features", 3.0)
            .is_ok());
    }

    #[test]
    fn voting_defaults_to_six_members_without_decision_tree() {
        let v = ModelSpec::new(ModelKind::Voting, 1);
        let kinds: Vec<_> = v.members.iter().map(|m| m.kind).collect();
        assert_eq!(kinds.len(), 6);
        assert!(!kinds.contains(&ModelKind::DecisionTree));
        let seeds: std::collections::BTreeSet<_> = v.members.iter().map(|m| m.seed).collect();
        assert_eq!(seeds.len(), 6);
        assert_ne!(v.reseeded(2).members[0].seed, v.members[0].seed);
    }

    fn constant_model(p_gop: f64) -> TrainedModel {
        // A one-leaf tree whose value is the requested probability.
        TrainedModel {
            spec: ModelSpec::new(ModelKind::DecisionTree, 0),
            columns: vec!["x0".into()],
            fingerprint: crate::dataset::fingerprint_of(["x0"]),
            diagnostics: Diagnostics::default(),
            fitted: FittedParams::DecisionTree(Tree {
                nodes: vec![Node::Leaf {
                    value: p_gop,
                    n_samples: 1,
                }],
                n_features: 1,
            }),
        }
    }

    fn voting_of(ps: &[f64]) -> TrainedModel {
        TrainedModel {
            spec: ModelSpec::new(ModelKind::Voting, 0),
            columns: vec!["x0".into()],
            fingerprint: crate::dataset::fingerprint_of(["x0"]),
            diagnostics: Diagnostics::default(),
            fitted: FittedParams::Voting(ps.iter().map(|&p| constant_model(p)).collect()),
        }
    }

    #[test]
    fn voting_is_the_member_mean() {
        let x = FeatureMatrix::unnamed(&[vec![0.0]]);
        let p = predict_proba(&voting_of(&[0.5; 6]), &x).unwrap()[0];
        assert_eq!(
            p,
            Proba {
                p_dnc: 0.5,
                p_gop: 0.5
            }
        );
        let p = predict_proba(&voting_of(&[0.9, 0.9, 0.9, 0.1, 0.1, 0.1]), &x).unwrap()[0];
        assert!((p.p_gop - 0.5).abs() < 1e-12);
    }

    #[test]
    fn policy_rule() {
        let strict = DecisionPolicy::new(0.9).unwrap();
        assert_eq!(strict.decide(0.95), Gop);
        assert_eq!(strict.decide(0.85), Dnc);
        assert_eq!(DecisionPolicy::default().decide(0.85), Gop);
        assert_eq!(DecisionPolicy::default().decide(0.5), Gop);
        assert!(DecisionPolicy::new(1.0).is_err());
        assert!(DecisionPolicy::new(0.0).is_err());
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let (x, y) = separable();
        let m = fit(&ModelSpec::new(ModelKind::GaussianNb, 0), &x, &y).unwrap();
        let other = FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &[vec![0.0, 0.0]]);
        assert!(matches!(
            predict_proba(&m, &other),
            Err(LearnerError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn importance_of_lone_split_and_pure_root() {
        let x = FeatureMatrix::unnamed(&[
            vec![0.0, 3.0],
            vec![1.0, 3.0],
            vec![2.0, 3.0],
            vec![3.0, 3.0],
        ]);
        let m = fit(
            &ModelSpec::new(ModelKind::DecisionTree, 0),
            &x,
            &labels(&[0, 0, 1, 1]),
        )
        .unwrap();
        let r = feature_importance(&m).unwrap();
        assert_eq!(
            r.entries,
            vec![("x0".to_string(), 1.0), ("x1".to_string(), 0.0)]
        );
        assert!(!r.degenerate);

        let r = feature_importance(&constant_model(1.0)).unwrap();
        assert!(r.degenerate);
        assert!(r.entries.iter().all(|(_, v)| *v == 0.0));

        let nb = fit(
            &ModelSpec::new(ModelKind::GaussianNb, 0),
            &x,
            &labels(&[0, 0, 1, 1]),
        )
        .unwrap();
        assert!(matches!(
            feature_importance(&nb),
            Err(LearnerError::UnsupportedKind(_))
        ));
    }

    #[test]
    fn forest_importance_tracks_split_frequency() {
        // Stumps whose only informative column is chosen with probability
        // 0.75 for A, 0.25 for B; both give the same gain.
        let a_only = FeatureMatrix::unnamed(&[vec![0.0, 1.0], vec![1.0, 1.0]]);
        let b_only = FeatureMatrix::unnamed(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let target = [0.0, 1.0];
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
            max_features: None,
        };
        let mut total = 0.0;
        let runs = 20;
        for s in 0..runs {
            let mut rng = seed::rng(s);
            let trees = (0..200)
                .map(|_| {
                    use rand::Rng;
                    let x = if rng.random_bool(0.75) {
                        &a_only
                    } else {
                        &b_only
                    };
                    Tree::grow(x, &target, vec![0, 1], params, Criterion::Gini, &mut rng)
                })
                .collect();
            let model = TrainedModel {
                spec: ModelSpec::new(ModelKind::RandomForest, s),
                columns: vec!["a".into(), "b".into()],
                fingerprint: crate::dataset::fingerprint_of(["a", "b"]),
                diagnostics: Diagnostics::default(),
                fitted: FittedParams::RandomForest(RandomForest { trees }),
            };
            let r = feature_importance(&model).unwrap();
            let sum: f64 = r.entries.iter().map(|e| e.1).sum();
            assert!((sum - 1.0).abs() < 1e-9);
            total += r.entries.iter().find(|e| e.0 == "a").unwrap().1;
        }
        let mean = total / runs as f64;
        assert!((mean - 0.75).abs() < 0.05, "{mean}");
    }
}
