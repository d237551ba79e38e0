use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, MetricsReport};
use super::EvalError;
use crate::dataset::{Dataset, ElectionYear, PartyLabel, Scaler, StateId};
use crate::learners::{self, DecisionPolicy, ModelSpec};
use crate::matrix::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Fold index of every dataset row, in dataset order.
    pub fold_of: Vec<usize>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Held-out p_gop of every row, in dataset order.
    pub out_of_fold_p_gop: Vec<f64>,
}

impl CvResult {
    pub fn folds(&self) -> usize {
        self.fold_accuracies.len()
    }
}

/// Seeded stratified assignment: each class is shuffled, then rows are dealt
/// round-robin with one running counter across both classes, so fold sizes
/// differ by at most one and each class is spread as evenly as possible.
pub fn stratified_folds(labels: &[PartyLabel], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in PartyLabel::BOTH {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    fold_of
}

/// Standardizes with statistics from the training rows only, fits, and
/// returns held-out p_gop values.
pub(crate) fn fit_and_score(
    spec: &ModelSpec,
    x: &FeatureMatrix,
    y: &[PartyLabel],
    train: &[usize],
    test: &[usize],
) -> Result<Vec<f64>, EvalError> {
    let x_train = x.select_rows(train);
    let scaler = Scaler::fit(&x_train)?;
    let x_train = scaler.transform(&x_train);
    let y_train: Vec<PartyLabel> = train.iter().map(|&i| y[i]).collect();
    let model = learners::fit(spec, &x_train, &y_train)?;
    let x_test = scaler.transform(&x.select_rows(test));
    Ok(learners::predict_proba(&model, &x_test)?
        .into_iter()
        .map(|p| p.p_gop)
        .collect())
}

/// Stratified k-fold cross-validation. The same spec (and seed) trains
/// every fold; `seed` only drives the fold assignment.
pub fn kfold_cv(
    dataset: &Dataset,
    k: usize,
    spec: &ModelSpec,
    seed: u64,
    policy: DecisionPolicy,
) -> Result<CvResult, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(k));
    }
    if dataset.len() < k {
        return Err(EvalError::TooFewRows {
            rows: dataset.len(),
            k,
        });
    }
    let x = dataset.matrix();
    let y = dataset.labels();
    let fold_of = stratified_folds(&y, k, seed);
    let mut out_of_fold_p_gop = vec![f64::NAN; y.len()];
    let mut fold_accuracies = Vec::with_capacity(k);
    for f in 0..k {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| fold_of[i] == f);
        let p = fit_and_score(spec, &x, &y, &train, &test)?;
        let mut correct = 0;
        for (&i, &pg) in test.iter().zip(&p) {
            out_of_fold_p_gop[i] = pg;
            correct += (policy.decide(pg) == y[i]) as usize;
        }
        log::debug!("{} fold {f}: {correct}/{}", spec.kind, test.len());
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvResult {
        fold_of,
        fold_accuracies,
        mean_accuracy,
        out_of_fold_p_gop,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePrediction {
    pub state: StateId,
    pub actual: PartyLabel,
    /// Most frequent label across repeats; an even split goes to the policy
    /// applied to `mean_p_gop`.
    pub predicted: PartyLabel,
    pub mean_p_gop: f64,
    pub gop_votes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalReport {
    pub test_year: ElectionYear,
    pub policy: DecisionPolicy,
    pub run_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub runs: Vec<MetricsReport>,
    /// Metrics of the modal predictions.
    pub modal: MetricsReport,
    pub predictions: Vec<StatePrediction>,
    /// Held-out p_gop per repeat, in `predictions` order.
    pub run_p_gop: Vec<Vec<f64>>,
}

/// Trains on `train_years`, predicts `test_year`, `repeats` times with
/// seeds derived from `spec.seed` and the repeat index.
pub fn temporal_eval(
    dataset: &Dataset,
    train_years: &[ElectionYear],
    test_year: ElectionYear,
    spec: &ModelSpec,
    policy: DecisionPolicy,
    repeats: usize,
) -> Result<TemporalReport, EvalError> {
    if repeats == 0 {
        return Err(EvalError::InvalidRepeats);
    }
    let present = dataset.years();
    for y in train_years.iter().chain([&test_year]) {
        if !present.contains(y) {
            return Err(EvalError::MissingYear(*y));
        }
    }
    let x = dataset.matrix();
    let y = dataset.labels();
    let rows = dataset.rows();
    let train: Vec<usize> = (0..rows.len())
        .filter(|&i| train_years.contains(&rows[i].year))
        .collect();
    let test: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].year == test_year)
        .collect();
    let mut run_p_gop = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let run_spec = spec.reseeded(seed::derive_indexed(spec.seed, "repeat", r));
        run_p_gop.push(fit_and_score(&run_spec, &x, &y, &train, &test)?);
    }
    let states: Vec<(StateId, PartyLabel)> = test.iter().map(|&i| (rows[i].state, y[i])).collect();
    summarize(test_year, &states, run_p_gop, policy)
}

fn summarize(
    test_year: ElectionYear,
    states: &[(StateId, PartyLabel)],
    run_p_gop: Vec<Vec<f64>>,
    policy: DecisionPolicy,
) -> Result<TemporalReport, EvalError> {
    let repeats = run_p_gop.len();
    let truth: Vec<PartyLabel> = states.iter().map(|(_, l)| *l).collect();
    let mut runs = Vec::with_capacity(repeats);
    let mut sum_p = vec![0.0; states.len()];
    let mut gop_votes = vec![0usize; states.len()];
    for p in &run_p_gop {
        let pred: Vec<PartyLabel> = p.iter().map(|&v| policy.decide(v)).collect();
        for (j, (&v, l)) in p.iter().zip(&pred).enumerate() {
            sum_p[j] += v;
            gop_votes[j] += (*l == PartyLabel::Gop) as usize;
        }
        runs.push(metrics(&truth, &pred)?);
    }
    let predictions: Vec<StatePrediction> = states
        .iter()
        .enumerate()
        .map(|(j, &(state, actual))| {
            let mean_p_gop = sum_p[j] / repeats as f64;
            let predicted = match (2 * gop_votes[j]).cmp(&repeats) {
                std::cmp::Ordering::Greater => PartyLabel::Gop,
                std::cmp::Ordering::Less => PartyLabel::Dnc,
                std::cmp::Ordering::Equal => policy.decide(mean_p_gop),
            };
            StatePrediction {
                state,
                actual,
                predicted,
                mean_p_gop,
                gop_votes: gop_votes[j],
            }
        })
        .collect();
    let modal_pred: Vec<PartyLabel> = predictions.iter().map(|p| p.predicted).collect();
    let run_accuracies: Vec<f64> = runs.iter().map(|m| m.accuracy).collect();
    Ok(TemporalReport {
        test_year,
        policy,
        mean_accuracy: run_accuracies.iter().sum::<f64>() / repeats as f64,
        run_accuracies,
        runs,
        modal: metrics(&truth, &modal_pred)?,
        predictions,
        run_p_gop,
    })
}

impl TemporalReport {
    pub fn predicted_winners(&self) -> BTreeMap<StateId, PartyLabel> {
        self.predictions
            .iter()
            .map(|p| (p.state, p.predicted))
            .collect()
    }

    /// The same fitted probabilities read under another policy.
    pub fn with_policy(&self, policy: DecisionPolicy) -> TemporalReport {
        let states: Vec<(StateId, PartyLabel)> = self
            .predictions
            .iter()
            .map(|p| (p.state, p.actual))
            .collect();
        summarize(self.test_year, &states, self.run_p_gop.clone(), policy)
            .expect("report already summarized once")
    }
}
