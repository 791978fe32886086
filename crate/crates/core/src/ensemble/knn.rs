//! k-nearest neighbors: 5 neighbors, euclidean metric, uniform weights.
//! The probability of a party is its share among the k neighbors.

use serde::{Deserialize, Serialize};

use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::error::{Error, Result};
use crate::types::Party;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSpec {
    pub k: usize,
    pub seed: u64,
}

impl KnnSpec {
    pub fn with_seed(seed: u64) -> Self {
        KnnSpec { k: 5, seed }
    }

    pub fn fit(&self, data: &TrainingSet) -> Result<KnnModel> {
        if self.k == 0 {
            return Err(Error::config("knn needs k >= 1"));
        }
        Ok(KnnModel {
            k: self.k.min(data.len()),
            x: data.features.clone(),
            y: data.label_indices(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
}

impl Predictor for KnnModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 = row
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, i)
            })
            .collect();
        // ties at equal distance resolve to the earlier training row
        dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut counts = [0.0f64; Party::COUNT];
        for (_, i) in dist.iter().take(self.k) {
            counts[self.y[*i]] += 1.0;
        }
        ProbabilityVector::from_scores(counts)
    }
}
