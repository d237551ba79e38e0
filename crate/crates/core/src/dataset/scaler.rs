use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};
use crate::matrix::FeatureMatrix;

/// Per-column z-score parameters. Constant columns get deviation 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Population mean and standard deviation of each column.
    pub fn fit(x: &FeatureMatrix) -> Result<Self, DatasetError> {
        let n = x.n_rows();
        if n == 0 {
            return Err(DatasetError::EmptyDataset);
        }
        let p = x.n_cols();
        let mut mean = vec![0.0; p];
        for r in x.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; p];
        for r in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n as f64).sqrt();
                // Relative cutoff: round-off noise on a constant column is not spread.
                if sd <= 1e-12 * m.abs().max(1.0) {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Ok(Scaler { mean, std })
    }

    pub fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        assert_eq!(x.n_cols(), self.mean.len(), "scaler width mismatch");
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn inverse_transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = m + s * *v;
            }
        }
        out
    }
}

pub fn fit_scaler(train: &Dataset) -> Result<Scaler, DatasetError> {
    Scaler::fit(&train.matrix())
}
