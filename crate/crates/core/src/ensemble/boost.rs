//! AdaBoost with probability-based (real) boosting over shallow trees: 50
//! estimators of depth 2, multiplicative sample reweighting from the base
//! learner's class probabilities, probability output via the softmax of the
//! averaged per-estimator contributions.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::types::Party;

const K: usize = Party::COUNT;
const PROBA_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostSpec {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl BoostSpec {
    pub fn with_seed(seed: u64) -> Self {
        BoostSpec {
            n_estimators: 50,
            max_depth: 2,
            seed,
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> BoostModel {
        let n = data.len();
        let y = data.label_indices();
        let indices: Vec<usize> = (0..n).collect();
        let params = TreeParams {
            max_depth: Some(self.max_depth),
            min_samples_split: 2,
            feature_subsample: None,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let mut weights = vec![1.0 / n as f64; n];
        let mut trees = Vec::with_capacity(self.n_estimators);

        for _ in 0..self.n_estimators {
            let tree = DecisionTree::fit(&data.features, &y, &weights, &indices, params, &mut rng);

            // weighted training error; a perfect stage ends the loop since
            // later stages would repeat it
            let mut err = 0.0;
            let mut probs = Vec::with_capacity(n);
            for (i, row) in data.features.iter().enumerate() {
                let p = tree.predict_proba(row);
                let predicted = argmax(&p);
                if predicted != y[i] {
                    err += weights[i];
                }
                probs.push(p);
            }
            trees.push(tree);
            if err <= 0.0 {
                break;
            }

            // w_i ← w_i · exp(−(K−1)/K · y_i^T log p_i) with the coded
            // response: 1 at the true class, −1/(K−1) elsewhere
            let scale = (K as f64 - 1.0) / K as f64;
            let mut total = 0.0;
            for i in 0..n {
                let p = &probs[i];
                let mut coded_dot = 0.0;
                for (k, pk) in p.iter().enumerate() {
                    let logp = pk.max(PROBA_CLIP).ln();
                    let code = if k == y[i] { 1.0 } else { -1.0 / (K as f64 - 1.0) };
                    coded_dot += code * logp;
                }
                weights[i] *= (-scale * coded_dot).exp();
                total += weights[i];
            }
            if total <= 0.0 || !total.is_finite() {
                break;
            }
            for w in &mut weights {
                *w /= total;
            }
        }
        BoostModel { trees }
    }
}

fn argmax(p: &[f64; K]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    trees: Vec<DecisionTree>,
}

impl Predictor for BoostModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        // per-estimator contribution h_k = (K−1)(log p_k − mean_j log p_j)
        let mut acc = [0.0f64; K];
        for tree in &self.trees {
            let p = tree.predict_proba(x);
            let logp: Vec<f64> = p.iter().map(|v| v.max(PROBA_CLIP).ln()).collect();
            let mean: f64 = logp.iter().sum::<f64>() / K as f64;
            for (a, lp) in acc.iter_mut().zip(logp.iter()) {
                *a += (K as f64 - 1.0) * (lp - mean);
            }
        }
        let m = self.trees.len().max(1) as f64;
        let mut logits = [0.0f64; K];
        for (l, a) in logits.iter_mut().zip(acc.iter()) {
            *l = a / m / (K as f64 - 1.0);
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs = [0.0f64; K];
        for (p, l) in probs.iter_mut().zip(logits.iter()) {
            *p = (l - max).exp();
        }
        ProbabilityVector::from_scores(probs)
    }
}
