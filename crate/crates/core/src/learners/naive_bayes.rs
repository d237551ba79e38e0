use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBayesParams {
    /// ε = var_smoothing × (largest feature variance over all training rows).
    pub var_smoothing: f64,
}

/// Gaussian naive Bayes. Index 0 is DNC, index 1 is GOP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub class_count: [usize; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
    pub epsilon: f64,
}

fn mean_var(rows: &[&[f64]], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; p];
    for r in rows {
        mean.iter_mut().zip(*r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(*r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    (mean, var)
}

impl GaussianNb {
    /// Tolerates single-class data: the missing class gets zero prior.
    /// A class with zero prior is never predicted.
    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &NaiveBayesParams) -> Self {
        let p = x.n_cols();
        let all: Vec<&[f64]> = x.rows().collect();
        let (_, total_var) = mean_var(&all, p);
        let max_var = total_var.iter().copied().fold(0.0, f64::max);
        let epsilon = params.var_smoothing * if max_var > 0.0 { max_var } else { 1.0 };

        let mut class_count = [0usize; 2];
        let mut mean = [vec![0.0; p], vec![0.0; p]];
        let mut var = [vec![1.0; p], vec![1.0; p]];
        for c in 0..2 {
            let rows: Vec<&[f64]> = x
                .rows()
                .zip(target)
                .filter(|(_, &t)| (t > 0.5) == (c == 1))
                .map(|(r, _)| r)
                .collect();
            class_count[c] = rows.len();
            if !rows.is_empty() {
                let (m, v) = mean_var(&rows, p);
                mean[c] = m;
                var[c] = v.into_iter().map(|v| v + epsilon).collect();
            }
        }
        GaussianNb {
            class_count,
            mean,
            var,
            epsilon,
        }
    }

    fn joint_log_likelihood(&self, c: usize, row: &[f64]) -> f64 {
        if self.class_count[c] == 0 {
            return f64::NEG_INFINITY;
        }
        let total = (self.class_count[0] + self.class_count[1]) as f64;
        let mut ll = (self.class_count[c] as f64 / total).ln();
        for ((x, m), v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            ll -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + 0.5 * (x - m) * (x - m) / v;
        }
        ll
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        let l0 = self.joint_log_likelihood(0, row);
        let l1 = self.joint_log_likelihood(1, row);
        if l1 == f64::NEG_INFINITY {
            return 0.0;
        }
        if l0 == f64::NEG_INFINITY {
            return 1.0;
        }
        // σ(l1 - l0) via log-sum-exp.
        let hi = l0.max(l1);
        let denom = (l0 - hi).exp() + (l1 - hi).exp();
        (l1 - hi).exp() / denom
    }
}
