//! Random forest: bootstrapped Gini trees with √d per-split feature
//! subsampling, probabilities averaged over the trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::types::Party;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSpec {
    pub n_trees: usize,
    /// Do not split subsets smaller than this.
    pub min_samples_split: usize,
    pub seed: u64,
}

impl ForestSpec {
    pub fn with_seed(seed: u64) -> Self {
        ForestSpec {
            n_trees: 10,
            min_samples_split: 5,
            seed,
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> ForestModel {
        let n = data.len();
        let y = data.label_indices();
        let weights = vec![1.0; n];
        let subsample = (data.dim() as f64).sqrt().ceil() as usize;
        let params = TreeParams {
            max_depth: None,
            min_samples_split: self.min_samples_split,
            feature_subsample: Some(subsample.max(1)),
        };

        let mut master = ChaCha12Rng::seed_from_u64(self.seed);
        let mut trees = Vec::with_capacity(self.n_trees);
        for _ in 0..self.n_trees {
            let mut rng = ChaCha12Rng::seed_from_u64(master.gen());
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            trees.push(DecisionTree::fit(
                &data.features,
                &y,
                &weights,
                &bootstrap,
                params,
                &mut rng,
            ));
        }
        ForestModel { trees }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
}

impl Predictor for ForestModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        let mut acc = [0.0f64; Party::COUNT];
        for tree in &self.trees {
            let p = tree.predict_proba(x);
            for (a, v) in acc.iter_mut().zip(p.iter()) {
                *a += v;
            }
        }
        ProbabilityVector::from_scores(acc)
    }
}
