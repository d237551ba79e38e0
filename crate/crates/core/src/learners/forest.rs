use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{normalize, Criterion, Tree, TreeParams};
use crate::matrix::FeatureMatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// `None` draws ⌈√p⌉ candidates per split.
    pub max_features: Option<usize>,
}

/// Bagged Gini trees; probability is the mean leaf GOP frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &FeatureMatrix, target: &[f64], params: &ForestParams, seed: u64) -> Self {
        let n = x.n_rows();
        let p = x.n_cols();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1));
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            max_features: Some(max_features),
        };
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = seed::rng(seed::derive_indexed(seed, "tree", t));
                let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                Tree::grow(x, target, bootstrap, tree_params, Criterion::Gini, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    pub fn predict_gop(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean of the per-tree normalized importances; trees without a positive
    /// gain split contribute zeros.
    pub fn raw_importances(&self) -> Vec<f64> {
        let p = self.trees.first().map_or(0, |t| t.n_features);
        let mut acc = vec![0.0; p];
        for t in &self.trees {
            if let Some(norm) = normalize(&t.raw_importances()) {
                acc.iter_mut().zip(norm).for_each(|(a, v)| *a += v);
            }
        }
        acc.iter_mut().for_each(|a| *a /= self.trees.len() as f64);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n_trees: usize) -> ForestParams {
        ForestParams {
            n_trees,
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }

    #[test]
    fn separable_data_is_fit() {
        let rows: Vec<_> = (0..20)
            .map(|i| vec![i as f64, (i * 7 % 5) as f64])
            .collect();
        let y: Vec<f64> = (0..20).map(|i| if i >= 10 { 1.0 } else { 0.0 }).collect();
        let x = FeatureMatrix::unnamed(&rows);
        let f = RandomForest::fit(&x, &y, &params(50), 3);
        assert!(f.predict_gop(&[18.0, 0.0]) > 0.8);
        assert!(f.predict_gop(&[1.0, 0.0]) < 0.2);
    }

    #[test]
    fn seed_determinism() {
        let rows: Vec<_> = (0..30)
            .map(|i| vec![(i % 7) as f64, (i % 3) as f64])
            .collect();
        let y: Vec<f64> = (0..30).map(|i| ((i % 7 + i % 3) % 2) as f64).collect();
        let x = FeatureMatrix::unnamed(&rows);
        let a = RandomForest::fit(&x, &y, &params(10), 9);
        let b = RandomForest::fit(&x, &y, &params(10), 9);
        let c = RandomForest::fit(&x, &y, &params(10), 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
