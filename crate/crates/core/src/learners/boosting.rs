//! Binary gradient boosting on the logistic deviance.
//!
//! The additive score F starts at the training log-odds. Each stage fits a
//! squared-error regression tree to the negative gradient y - σ(F) and adds
//! `learning_rate` times its leaf values. Leaves hold the mean residual by
//! default; the Newton variant uses Σr / Σσ(1-σ) instead.

use serde::{Deserialize, Serialize};

use super::tree::{Criterion, Tree, TreeParams};
use crate::matrix::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostingParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub newton: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init_score: f64,
    pub learning_rate: f64,
    pub stages: Vec<Tree>,
    /// Training log-loss after initialization and after every stage.
    pub train_loss: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary log-loss of scores `f` against 0/1 targets, computed on the
/// logit scale for stability.
pub(crate) fn log_loss_from_scores(scores: &[f64], target: &[f64]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(target)
        .map(|(&f, &y)| softplus(f) - y * f)
        .sum();
    total / scores.len() as f64
}

/// ln(1 + e^z) without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl GradientBoosting {
    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &BoostingParams, seed: u64) -> Self {
        let n = x.n_rows();
        let prior = (target.iter().sum::<f64>() / n as f64).clamp(1e-12, 1.0 - 1e-12);
        let init_score = (prior / (1.0 - prior)).ln();
        let mut scores = vec![init_score; n];
        let mut train_loss = vec![log_loss_from_scores(&scores, target)];
        let tree_params = TreeParams {
            max_depth: Some(params.max_depth),
            min_samples_split: params.min_samples_split,
            max_features: None,
        };
        // No feature subsampling, so the stream is never drawn from.
        let mut rng = seed::rng(seed);
        let mut stages = Vec::with_capacity(params.n_stages);
        for _ in 0..params.n_stages {
            let prob: Vec<f64> = scores.iter().map(|&f| sigmoid(f)).collect();
            let residual: Vec<f64> = target.iter().zip(&prob).map(|(y, p)| y - p).collect();
            let mut tree = Tree::grow(
                x,
                &residual,
                (0..n).collect(),
                tree_params,
                Criterion::SquaredError,
                &mut rng,
            );
            if params.newton {
                let mut num = vec![0.0; tree.nodes.len()];
                let mut den = vec![0.0; tree.nodes.len()];
                for i in 0..n {
                    let leaf = tree.leaf_index(x.row(i));
                    num[leaf] += residual[i];
                    den[leaf] += prob[i] * (1.0 - prob[i]);
                }
                for leaf in 0..tree.nodes.len() {
                    if den[leaf] > 0.0 {
                        tree.set_leaf_value(leaf, num[leaf] / den[leaf].max(1e-12));
                    }
                }
            }
            for (i, s) in scores.iter_mut().enumerate() {
                *s += params.learning_rate * tree.predict(x.row(i));
            }
            train_loss.push(log_loss_from_scores(&scores, target));
            stages.push(tree);
        }
        GradientBoosting {
            init_score,
            learning_rate: params.learning_rate,
            stages,
            train_loss,
        }
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.init_score
            + self.learning_rate * self.stages.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        sigmoid(self.score(row))
    }

    /// Summed squared-error reduction over all stages.
    pub fn raw_importances(&self) -> Vec<f64> {
        let p = self.stages.first().map_or(0, |t| t.n_features);
        let mut acc = vec![0.0; p];
        for t in &self.stages {
            acc.iter_mut()
                .zip(t.raw_importances())
                .for_each(|(a, v)| *a += v);
        }
        acc
    }
}
