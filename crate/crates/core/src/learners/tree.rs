//! CART tree growing shared by the decision tree, the random forest and the
//! boosting stages.
//!
//! Splits sit at midpoints between consecutive distinct sorted values and
//! send `x <= threshold` left. Among equally good splits the lowest feature
//! index wins, then the lowest threshold. Any impure node that can be split
//! is split, even at zero gain, so two-level interactions (XOR) stay
//! reachable by a greedy grower.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// Binary Gini impurity over 0/1 targets.
    Gini,
    /// Squared error around the node mean.
    SquaredError,
}

impl Criterion {
    /// Impurity times node size, from target sum and sum of squares.
    fn weighted(self, n: f64, sum: f64, sum_sq: f64) -> f64 {
        match self {
            Criterion::Gini => 2.0 * sum * (n - sum) / n,
            Criterion::SquaredError => (sum_sq - sum * sum / n).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Candidate features drawn per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        /// Decrease in size-weighted impurity achieved by this split.
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

struct Grower<'a, R> {
    x: &'a FeatureMatrix,
    target: &'a [f64],
    params: TreeParams,
    criterion: Criterion,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Grower<'_, R> {
    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let n = samples.len();
        let mean = samples.iter().map(|&i| self.target[i]).sum::<f64>() / n as f64;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: mean,
            n_samples: n,
        });

        let pure = samples
            .iter()
            .all(|&i| self.target[i] == self.target[samples[0]]);
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || n < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some(best) = self.best_split(&samples) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.x.get(i, best.feature) <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
            n_samples: n,
            gain: best.gain,
        };
        id
    }

    fn best_split(&mut self, samples: &[usize]) -> Option<Candidate> {
        let p = self.x.n_cols();
        let mut order: Vec<usize> = (0..p).collect();
        let quota = match self.params.max_features {
            Some(k) if k < p => {
                order.shuffle(self.rng);
                k
            }
            _ => p,
        };

        let n = samples.len() as f64;
        let (sum, sum_sq) = samples.iter().fold((0.0, 0.0), |(s, q), &i| {
            let t = self.target[i];
            (s + t, q + t * t)
        });
        let parent = self.criterion.weighted(n, sum, sum_sq);
        let tol = 1e-12 * (1.0 + parent);

        let mut best: Option<Candidate> = None;
        let mut sorted = samples.to_vec();
        for (examined, &f) in order.iter().enumerate() {
            // Keep drawing past the quota until at least one valid split exists.
            if examined >= quota && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &b| {
                self.x
                    .get(a, f)
                    .total_cmp(&self.x.get(b, f))
                    .then(a.cmp(&b))
            });
            let (mut ls, mut lq) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                let t = self.target[sorted[k]];
                ls += t;
                lq += t * t;
                let (a, b) = (self.x.get(sorted[k], f), self.x.get(sorted[k + 1], f));
                if a >= b {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let gain = parent
                    - self.criterion.weighted(nl, ls, lq)
                    - self.criterion.weighted(nr, sum - ls, sum_sq - lq);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        gain > cur.gain + tol
                            || ((gain - cur.gain).abs() <= tol
                                && (f, threshold) < (cur.feature, cur.threshold))
                    }
                };
                if better {
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        gain: gain.max(0.0),
                    });
                }
            }
        }
        best
    }
}

impl Tree {
    /// Grows a tree on `samples` (row indices into `x`, repeats allowed).
    pub(crate) fn grow<R: Rng>(
        x: &FeatureMatrix,
        target: &[f64],
        samples: Vec<usize>,
        params: TreeParams,
        criterion: Criterion,
        rng: &mut R,
    ) -> Tree {
        assert!(!samples.is_empty(), "cannot grow a tree on no samples");
        let mut g = Grower {
            x,
            target,
            params,
            criterion,
            rng,
            nodes: Vec::new(),
        };
        g.grow(samples, 0);
        Tree {
            nodes: g.nodes,
            n_features: x.n_cols(),
        }
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => *value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub(crate) fn set_leaf_value(&mut self, leaf: usize, new_value: f64) {
        if let Node::Leaf { value, .. } = &mut self.nodes[leaf] {
            *value = new_value;
        }
    }

    /// Per-feature impurity decrease, each split weighted by its share of the
    /// root's samples. Not normalized.
    pub fn raw_importances(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        let root = match &self.nodes[0] {
            Node::Leaf { n_samples, .. } | Node::Split { n_samples, .. } => *n_samples as f64,
        };
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                imp[*feature] += gain / root;
            }
        }
        imp
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Split { .. }))
            .count()
    }
}

/// Scales a raw importance vector to sum 1; `None` when nothing was split
/// with positive gain.
pub(crate) fn normalize(raw: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    (total > 0.0).then(|| raw.iter().map(|v| v / total).collect())
}
