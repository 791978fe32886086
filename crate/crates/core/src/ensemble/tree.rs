//! Weighted CART decision tree with Gini impurity, shared by the random
//! forest (per-split feature subsampling) and the boosting base learner
//! (depth-capped, sample-weighted).

use rand::seq::index::sample;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::types::Party;

const NCLASS: usize = Party::COUNT;

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    /// Do not split nodes holding fewer rows than this.
    pub min_samples_split: usize,
    /// Number of candidate features per split; `None` tries all.
    pub feature_subsample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probs: [f64; NCLASS],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    weights: &'a [f64],
    params: TreeParams,
    rng: &'a mut ChaCha12Rng,
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Fit on rows selected by `indices` (repetitions allowed, e.g. a
    /// bootstrap multiset) with per-row weights.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        weights: &[f64],
        indices: &[usize],
        params: TreeParams,
        rng: &mut ChaCha12Rng,
    ) -> DecisionTree {
        let mut builder = Builder {
            x,
            y,
            weights,
            params,
            rng,
            nodes: Vec::new(),
        };
        let mut idx = indices.to_vec();
        builder.grow(&mut idx, 0);
        DecisionTree {
            nodes: builder.nodes,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> [f64; NCLASS] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { probs } => return *probs,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

impl<'a> Builder<'a> {
    /// Grow a subtree over `indices`; returns its root node id.
    fn grow(&mut self, indices: &mut [usize], depth: usize) -> usize {
        let counts = self.class_weights(indices);
        let total: f64 = counts.iter().sum();

        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        let too_small = indices.len() < self.params.min_samples_split;
        let pure = counts.iter().filter(|w| **w > 0.0).count() <= 1;

        if depth_capped || too_small || pure {
            return self.leaf(&counts, total);
        }
        match self.best_split(indices) {
            None => self.leaf(&counts, total),
            Some((feature, threshold)) => {
                let mid = partition(self.x, indices, feature, threshold);
                if mid == 0 || mid == indices.len() {
                    return self.leaf(&counts, total);
                }
                let node_id = self.nodes.len();
                self.nodes.push(Node::Leaf { probs: [0.0; NCLASS] }); // placeholder
                let (left_idx, right_idx) = indices.split_at_mut(mid);
                let left = self.grow(left_idx, depth + 1);
                let right = self.grow(right_idx, depth + 1);
                self.nodes[node_id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                node_id
            }
        }
    }

    fn leaf(&mut self, counts: &[f64; NCLASS], total: f64) -> usize {
        let mut probs = [0.0; NCLASS];
        if total > 0.0 {
            for (p, c) in probs.iter_mut().zip(counts.iter()) {
                *p = c / total;
            }
        } else {
            probs = [1.0 / NCLASS as f64; NCLASS];
        }
        self.nodes.push(Node::Leaf { probs });
        self.nodes.len() - 1
    }

    fn class_weights(&self, indices: &[usize]) -> [f64; NCLASS] {
        let mut counts = [0.0; NCLASS];
        for &i in indices.iter() {
            counts[self.y[i]] += self.weights[i];
        }
        counts
    }

    /// Exhaustive best split over the candidate features; ties resolve to
    /// the first (lowest feature index, lowest threshold) candidate scanned.
    fn best_split(&mut self, indices: &[usize]) -> Option<(usize, f64)> {
        let dim = self.x[0].len();
        let candidates: Vec<usize> = match self.params.feature_subsample {
            Some(m) if m < dim => {
                let mut picked = sample(self.rng, dim, m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..dim).collect(),
        };

        let parent_counts = self.class_weights(indices);
        let total: f64 = parent_counts.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let parent_gini = gini(&parent_counts, total);

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        let mut order: Vec<usize> = indices.to_vec();
        for &feature in &candidates {
            order.sort_unstable_by(|a, b| self.x[*a][feature].total_cmp(&self.x[*b][feature]));

            let mut left = [0.0f64; NCLASS];
            let mut left_total = 0.0;
            for w in 0..order.len().saturating_sub(1) {
                let i = order[w];
                left[self.y[i]] += self.weights[i];
                left_total += self.weights[i];
                let here = self.x[i][feature];
                let next = self.x[order[w + 1]][feature];
                if next <= here {
                    continue; // no boundary between equal values
                }
                let mut right = parent_counts;
                for k in 0..NCLASS {
                    right[k] -= left[k];
                }
                let right_total = total - left_total;
                if left_total <= 0.0 || right_total <= 0.0 {
                    continue;
                }
                let weighted = (left_total / total) * gini(&left, left_total)
                    + (right_total / total) * gini(&right, right_total);
                let gain = parent_gini - weighted;
                if gain > 1e-12 && best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, feature, here + (next - here) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn gini(counts: &[f64; NCLASS], total: f64) -> f64 {
    let mut sum_sq = 0.0;
    for c in counts {
        let p = c / total;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

/// In-place partition by `x[feature] <= threshold`; returns the split point.
fn partition(x: &[Vec<f64>], indices: &mut [usize], feature: usize, threshold: f64) -> usize {
    let mut mid = 0;
    for i in 0..indices.len() {
        if x[indices[i]][feature] <= threshold {
            indices.swap(mid, i);
            mid += 1;
        }
    }
    // keep child order deterministic regardless of swap history
    indices[..mid].sort_unstable();
    indices[mid..].sort_unstable();
    mid
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn fit_simple(x: &[Vec<f64>], y: &[usize], params: TreeParams) -> DecisionTree {
        let weights = vec![1.0; x.len()];
        let indices: Vec<usize> = (0..x.len()).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        DecisionTree::fit(x, y, &weights, &indices, params, &mut rng)
    }

    fn default_params() -> TreeParams {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            feature_subsample: None,
        }
    }

    #[test]
    fn splits_a_one_dimensional_step() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let tree = fit_simple(&x, &y, default_params());
        for i in 0..10 {
            let probs = tree.predict_proba(&[i as f64]);
            assert_eq!(probs[usize::from(i >= 5)], 1.0);
        }
    }

    #[test]
    fn pure_node_becomes_leaf() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![3, 3, 3];
        let tree = fit_simple(&x, &y, default_params());
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict_proba(&[5.0])[3], 1.0);
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let x: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y = vec![0, 1, 0, 1];
        let params = TreeParams {
            min_samples_split: 5,
            ..default_params()
        };
        let tree = fit_simple(&x, &y, params);
        assert_eq!(tree.node_count(), 1);
        let probs = tree.predict_proba(&[0.0]);
        assert_eq!(probs[0], 0.5);
        assert_eq!(probs[1], 0.5);
    }

    #[test]
    fn depth_cap_limits_nodes() {
        let x: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..32).map(|i| i % 2).collect();
        let params = TreeParams {
            max_depth: Some(2),
            ..default_params()
        };
        let tree = fit_simple(&x, &y, params);
        // depth-2 binary tree: at most 3 splits + 4 leaves
        assert!(tree.node_count() <= 7);
    }

    #[test]
    fn sample_weights_steer_the_split() {
        // same point set, but weight mass concentrated on class 1 rows
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![0, 0, 1, 1];
        let weights = vec![0.01, 0.01, 10.0, 10.0];
        let indices: Vec<usize> = (0..4).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let tree = DecisionTree::fit(&x, &y, &weights, &indices, default_params(), &mut rng);
        let p = tree.predict_proba(&[2.5]);
        assert!(p[1] > 0.99);
    }

    #[test]
    fn fit_is_deterministic_given_seed() {
        let x: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 7) as f64, (i % 5) as f64, (i % 3) as f64])
            .collect();
        let y: Vec<usize> = (0..50).map(|i| i % 4).collect();
        let weights = vec![1.0; 50];
        let indices: Vec<usize> = (0..50).collect();
        let params = TreeParams {
            feature_subsample: Some(2),
            ..default_params()
        };
        let mut rng1 = ChaCha12Rng::seed_from_u64(9);
        let mut rng2 = ChaCha12Rng::seed_from_u64(9);
        let t1 = DecisionTree::fit(&x, &y, &weights, &indices, params, &mut rng1);
        let t2 = DecisionTree::fit(&x, &y, &weights, &indices, params, &mut rng2);
        assert_eq!(t1, t2);
    }
}
