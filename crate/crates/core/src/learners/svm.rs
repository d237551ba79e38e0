//! Linear SVM trained with Pegasos, with Platt-calibrated probabilities.
//!
//! Pegasos runs stochastic sub-gradient descent on the primal hinge loss
//! with step 1/(λt). The bias is handled by appending a constant 1 feature,
//! so it is regularized like the other weights. After training a sigmoid
//! P(GOP | f) = 1 / (1 + exp(A·f + B)) is fitted to the training decision
//! values by Newton's method with backtracking (the Lin–Lin–Weng variant of
//! Platt's procedure, including its smoothed targets).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::logistic::dot;
use crate::matrix::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

impl PlattScaling {
    pub fn fit(decision: &[f64], positive: &[bool]) -> Self {
        let n_pos = positive.iter().filter(|p| **p).count() as f64;
        let n_neg = positive.len() as f64 - n_pos;
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();

        let max_iter = 100;
        let min_step = 1e-10;
        let sigma = 1e-12;
        let eps = 1e-5;

        let mut a = 0.0;
        let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
        let objective = |a: f64, b: f64| -> f64 {
            decision
                .iter()
                .zip(&t)
                .map(|(&f, &ti)| {
                    let fapb = f * a + b;
                    if fapb >= 0.0 {
                        ti * fapb + (-fapb).exp().ln_1p()
                    } else {
                        (ti - 1.0) * fapb + fapb.exp().ln_1p()
                    }
                })
                .sum()
        };
        let mut fval = objective(a, b);
        for _ in 0..max_iter {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
            for (&f, &ti) in decision.iter().zip(&t) {
                let fapb = f * a + b;
                let (p, q) = if fapb >= 0.0 {
                    let e = (-fapb).exp();
                    (e / (1.0 + e), 1.0 / (1.0 + e))
                } else {
                    let e = fapb.exp();
                    (1.0 / (1.0 + e), e / (1.0 + e))
                };
                let d2 = p * q;
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = ti - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < eps && g2.abs() < eps {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            while step >= min_step {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = objective(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    a = na;
                    b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if step < min_step {
                break;
            }
        }
        PlattScaling { a, b }
    }

    pub fn probability(&self, decision: f64) -> f64 {
        let fapb = decision * self.a + self.b;
        if fapb >= 0.0 {
            let e = (-fapb).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + fapb.exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub calibration: PlattScaling,
    /// Primal objective at the final iterate.
    pub final_hinge_loss: f64,
}

impl LinearSvm {
    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &SvmParams, seed: u64) -> Self {
        let n = x.n_rows();
        let p = x.n_cols();
        let sign: Vec<f64> = target
            .iter()
            .map(|&t| if t > 0.5 { 1.0 } else { -1.0 })
            .collect();
        // weights[p] is the bias on the constant feature.
        let mut w = vec![0.0; p + 1];
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = seed::rng(seed);
        let radius = 1.0 / params.lambda.sqrt();
        let mut t = 0usize;
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (params.lambda * t as f64);
                let row = x.row(i);
                let margin = sign[i] * (dot(row, &w[..p]) + w[p]);
                let shrink = 1.0 - eta * params.lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    let step = eta * sign[i];
                    w[..p]
                        .iter_mut()
                        .zip(row)
                        .for_each(|(v, xi)| *v += step * xi);
                    w[p] += step;
                }
                // Optional Pegasos projection onto the ball of radius 1/√λ.
                let norm = dot(&w, &w).sqrt();
                if norm > radius {
                    let s = radius / norm;
                    w.iter_mut().for_each(|v| *v *= s);
                }
            }
        }
        let regularizer = 0.5 * params.lambda * dot(&w, &w);
        let bias = w[p];
        w.truncate(p);
        let decision: Vec<f64> = x.rows().map(|r| dot(r, &w) + bias).collect();
        let hinge = decision
            .iter()
            .zip(&sign)
            .map(|(f, s)| (1.0 - s * f).max(0.0))
            .sum::<f64>()
            / n as f64;
        let positive: Vec<bool> = target.iter().map(|&t| t > 0.5).collect();
        let calibration = PlattScaling::fit(&decision, &positive);
        LinearSvm {
            weights: w,
            bias,
            calibration,
            final_hinge_loss: hinge + regularizer,
        }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(row, &self.weights) + self.bias
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        self.calibration.probability(self.decision(row))
    }
}
