//! Feed-forward network: ReLU hidden layers, one sigmoid output unit,
//! binary cross-entropy, minibatch SGD with classical momentum.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::boosting::{sigmoid, softplus};
use crate::matrix::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn glorot<R: Rng>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        Layer {
            n_in,
            n_out,
            weights: (0..n_in * n_out)
                .map(|_| rng.random_range(-limit..=limit))
                .collect(),
            bias: vec![0.0; n_out],
        }
    }

    fn forward(&self, input: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| {
                let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
                self.bias[o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub final_loss: f64,
}

impl Mlp {
    /// Randomly initialized network with the given hidden widths.
    pub fn init(n_inputs: usize, hidden: &[usize], seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut widths = vec![n_inputs];
        widths.extend_from_slice(hidden);
        widths.push(1);
        let layers = widths
            .windows(2)
            .map(|w| Layer::glorot(w[0], w[1], &mut rng))
            .collect();
        Mlp {
            layers,
            final_loss: f64::NAN,
        }
    }

    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &MlpParams, seed: u64) -> Self {
        let mut net = Mlp::init(x.n_cols(), &params.hidden, seed::derive(seed, &["init"]));
        let mut rng = seed::rng(seed::derive(seed, &["shuffle"]));
        let mut velocity = vec![0.0; net.n_params()];
        let mut order: Vec<usize> = (0..x.n_rows()).collect();
        let batch = params.batch_size.max(1);
        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let grad = net.batch_gradient(x, target, chunk);
                let mut flat = net.params();
                for ((v, p), g) in velocity.iter_mut().zip(&mut flat).zip(&grad) {
                    *v = params.momentum * *v - params.learning_rate * g;
                    *p += *v;
                }
                net.set_params(&flat);
            }
        }
        net.final_loss = net.loss(x, target);
        net
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }

    /// Output logit.
    pub fn logit(&self, row: &[f64]) -> f64 {
        let mut a = row.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            a = l.forward(&a);
            if i < last {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        a[0]
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Mean binary cross-entropy over all rows.
    pub fn loss(&self, x: &FeatureMatrix, target: &[f64]) -> f64 {
        x.rows()
            .zip(target)
            .map(|(r, &y)| {
                let z = self.logit(r);
                softplus(z) - y * z
            })
            .sum::<f64>()
            / x.n_rows() as f64
    }

    /// Gradient of [`Mlp::loss`] in [`Mlp::params`] order.
    pub fn gradient(&self, x: &FeatureMatrix, target: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..x.n_rows()).collect();
        self.batch_gradient(x, target, &all)
    }

    fn batch_gradient(&self, x: &FeatureMatrix, target: &[f64], rows: &[usize]) -> Vec<f64> {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
            .collect();
        let last = self.layers.len() - 1;
        let scale = 1.0 / rows.len() as f64;
        for &i in rows {
            // Activations per layer input, and pre-activations per layer.
            let mut inputs = vec![x.row(i).to_vec()];
            let mut pre = Vec::with_capacity(self.layers.len());
            for (k, l) in self.layers.iter().enumerate() {
                let z = l.forward(inputs.last().unwrap());
                if k < last {
                    inputs.push(z.iter().map(|v| v.max(0.0)).collect());
                }
                pre.push(z);
            }
            let mut delta = vec![(sigmoid(pre[last][0]) - target[i]) * scale];
            for k in (0..=last).rev() {
                let l = &self.layers[k];
                let input = &inputs[k];
                let (gw, gb) = &mut grads[k];
                for o in 0..l.n_out {
                    gb[o] += delta[o];
                    let row = &mut gw[o * l.n_in..(o + 1) * l.n_in];
                    row.iter_mut()
                        .zip(input)
                        .for_each(|(g, a)| *g += delta[o] * a);
                }
                if k > 0 {
                    let mut back = vec![0.0; l.n_in];
                    for (o, d) in delta.iter().enumerate() {
                        let w = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                        back.iter_mut().zip(w).for_each(|(b, wv)| *b += d * wv);
                    }
                    for (b, z) in back.iter_mut().zip(&pre[k - 1]) {
                        if *z <= 0.0 {
                            *b = 0.0;
                        }
                    }
                    delta = back;
                }
            }
        }
        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        flat
    }
}
