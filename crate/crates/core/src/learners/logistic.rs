use serde::{Deserialize, Serialize};

use super::boosting::{sigmoid, softplus};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

/// L2-penalized logistic regression, fit by full-batch gradient descent with
/// an Armijo backtracking line search. The intercept is not penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub final_loss: f64,
    pub iterations: usize,
}

/// Objective: mean log-loss + (l2 / 2)·‖w‖².
pub(crate) fn objective(x: &FeatureMatrix, target: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = x.n_rows() as f64;
    let data: f64 = x
        .rows()
        .zip(target)
        .map(|(r, &y)| {
            let z = b + dot(r, w);
            softplus(z) - y * z
        })
        .sum();
    data / n + 0.5 * l2 * dot(w, w)
}

fn gradient(x: &FeatureMatrix, target: &[f64], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (r, &y) in x.rows().zip(target) {
        let err = sigmoid(b + dot(r, w)) - y;
        gb += err;
        gw.iter_mut().zip(r).for_each(|(g, v)| *g += err * v);
    }
    gw.iter_mut()
        .zip(w)
        .for_each(|(g, wj)| *g = *g / n + l2 * wj);
    (gw, gb / n)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticRegression {
    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &LogisticParams) -> Self {
        let p = x.n_cols();
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let mut loss = objective(x, target, &w, b, params.l2);
        let mut step: f64 = 1.0;
        let mut iterations = 0;
        while iterations < params.max_iter {
            let (gw, gb) = gradient(x, target, &w, b, params.l2);
            let g2 = dot(&gw, &gw) + gb * gb;
            if g2.sqrt() < params.tol {
                break;
            }
            iterations += 1;
            // Let the step grow again after shrinking.
            step = (step * 2.0).min(1e6);
            loop {
                let w_new: Vec<f64> = w.iter().zip(&gw).map(|(wj, g)| wj - step * g).collect();
                let b_new = b - step * gb;
                let new_loss = objective(x, target, &w_new, b_new, params.l2);
                if new_loss <= loss - 1e-4 * step * g2 {
                    w = w_new;
                    b = b_new;
                    loss = new_loss;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            if step < 1e-20 {
                break;
            }
        }
        LogisticRegression {
            weights: w,
            intercept: b,
            final_loss: loss,
            iterations,
        }
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        sigmoid(self.intercept + dot(row, &self.weights))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: LogisticParams = LogisticParams {
        l2: 1e-4,
        max_iter: 10_000,
        tol: 1e-6,
    };

    fn toy() -> (FeatureMatrix, Vec<f64>) {
        let x = FeatureMatrix::unnamed(&[vec![-1.0], vec![-2.0], vec![1.0], vec![2.0]]);
        (x, vec![0.0, 0.0, 1.0, 1.0])
    }

    #[test]
    fn separable_toy_probabilities() {
        let (x, y) = toy();
        let m = LogisticRegression::fit(&x, &y, &PARAMS);
        assert!(m.predict_gop(&[2.0]) > 0.9);
        assert!(m.predict_gop(&[-2.0]) < 0.1);
    }

    /// Oracle: grid search over (w, b) ∈ [-20, 20]² for the same objective.
    #[test]
    fn matches_brute_force_grid_optimum() {
        let (x, y) = toy();
        let m = LogisticRegression::fit(&x, &y, &PARAMS);
        let obj = |w: f64, b: f64| {
            let rows = [(-1.0, 0.0), (-2.0, 0.0), (1.0, 1.0), (2.0, 1.0)];
            rows.iter()
                .map(|&(xi, yi): &(f64, f64)| {
                    let z = w * xi + b;
                    let p = 1.0 / (1.0 + (-z).exp());
                    -(yi * p.ln() + (1.0 - yi) * (1.0 - p).ln())
                })
                .sum::<f64>()
                / 4.0
                + 0.5 * 1e-4 * w * w
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        // Coarse pass, then a fine pass around the coarse optimum.
        for i in 0..=400 {
            for j in 0..=40 {
                let (w, b) = (-20.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64);
                let v = obj(w, b);
                if v < best.0 {
                    best = (v, w, b);
                }
            }
        }
        let (_, cw, cb) = best;
        for i in 0..=400 {
            for j in 0..=40 {
                let (w, b) = (cw - 0.2 + 0.001 * i as f64, cb - 0.02 + 0.001 * j as f64);
                let v = obj(w, b);
                if v < best.0 {
                    best = (v, w, b);
                }
            }
        }
        let (grid_loss, grid_w, grid_b) = best;
        assert!(
            (m.weights[0] - grid_w).abs() < 0.01,
            "{} vs {}",
            m.weights[0],
            grid_w
        );
        assert!((m.intercept - grid_b).abs() < 0.01);
        assert!(m.final_loss <= grid_loss + 1e-9);
        assert!((obj(m.weights[0], m.intercept) - m.final_loss).abs() < 1e-9);
    }

    #[test]
    fn converges_on_overlapping_data() {
        let x = FeatureMatrix::unnamed(&[vec![0.0], vec![1.0], vec![2.0], vec![1.0]]);
        let y = [0.0, 0.0, 1.0, 1.0];
        let m = LogisticRegression::fit(&x, &y, &PARAMS);
        assert!(m.iterations < PARAMS.max_iter);
        let (gw, gb) = gradient(&x, &y, &m.weights, m.intercept, PARAMS.l2);
        assert!((gw[0] * gw[0] + gb * gb).sqrt() < 1e-6);
    }
}
