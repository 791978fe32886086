//! Gaussian naive Bayes with a variance floor.
//!
//! Features here are bounded averages and many imputed cells are the
//! constant 0.5, so per-feature variances can collapse to zero; the floor
//! keeps the likelihoods finite.

use serde::{Deserialize, Serialize};

use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::types::Party;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesSpec {
    pub variance_floor: f64,
    pub seed: u64,
}

impl BayesSpec {
    pub fn with_seed(seed: u64) -> Self {
        BayesSpec {
            variance_floor: 1e-9,
            seed,
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> BayesModel {
        let dim = data.dim();
        let counts = data.class_counts();
        let total = data.len() as f64;

        let mut classes = Vec::with_capacity(Party::COUNT);
        for party in Party::ALL {
            let k = party.index();
            if counts[k] == 0 {
                classes.push(None);
                continue;
            }
            let nk = counts[k] as f64;
            let mut mean = vec![0.0f64; dim];
            for (row, label) in data.features.iter().zip(data.labels.iter()) {
                if label.index() == k {
                    for (m, v) in mean.iter_mut().zip(row.iter()) {
                        *m += v;
                    }
                }
            }
            for m in &mut mean {
                *m /= nk;
            }
            let mut var = vec![0.0f64; dim];
            for (row, label) in data.features.iter().zip(data.labels.iter()) {
                if label.index() == k {
                    for ((s, v), m) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
                        let d = v - m;
                        *s += d * d;
                    }
                }
            }
            for s in &mut var {
                *s = (*s / nk).max(self.variance_floor);
            }
            classes.push(Some(ClassStats {
                log_prior: (nk / total).ln(),
                mean,
                var,
            }));
        }
        BayesModel { classes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassStats {
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    classes: Vec<Option<ClassStats>>,
}

impl Predictor for BayesModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        const LN_2PI: f64 = 1.8378770664093453;
        let mut log_joint = [f64::NEG_INFINITY; Party::COUNT];
        for (k, stats) in self.classes.iter().enumerate() {
            let Some(stats) = stats else { continue };
            let mut lj = stats.log_prior;
            for ((v, m), s2) in x.iter().zip(stats.mean.iter()).zip(stats.var.iter()) {
                let d = v - m;
                lj -= 0.5 * (LN_2PI + s2.ln() + d * d / s2);
            }
            log_joint[k] = lj;
        }
        // log-sum-exp normalization
        let max = log_joint.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut probs = [0.0f64; Party::COUNT];
        if max.is_finite() {
            for (p, lj) in probs.iter_mut().zip(log_joint.iter()) {
                *p = (lj - max).exp();
            }
        }
        ProbabilityVector::from_scores(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn well_separated_gaussians_classify_cleanly() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n1 = Normal::new(0.2, 0.03).unwrap();
        let n2 = Normal::new(0.8, 0.03).unwrap();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..100 {
            features.push(vec![n1.sample(&mut rng), n1.sample(&mut rng)]);
            labels.push(Party::PSOE);
            features.push(vec![n2.sample(&mut rng), n2.sample(&mut rng)]);
            labels.push(Party::PP);
        }
        let data = TrainingSet::new(features, labels).unwrap();
        let model = BayesSpec::with_seed(0).fit(&data);

        let mut correct = 0;
        let mut total = 0;
        for _ in 0..200 {
            let x = vec![n1.sample(&mut rng), n1.sample(&mut rng)];
            if model.predict_proba(&x).argmax() == Party::PSOE {
                correct += 1;
            }
            let x = vec![n2.sample(&mut rng), n2.sample(&mut rng)];
            if model.predict_proba(&x).argmax() == Party::PP {
                correct += 1;
            }
            total += 2;
        }
        assert!(correct as f64 / total as f64 > 0.95);
    }

    #[test]
    fn constant_features_survive_via_variance_floor() {
        let features = vec![vec![0.5, 0.1], vec![0.5, 0.2], vec![0.5, 0.8], vec![0.5, 0.9]];
        let labels = vec![Party::UP, Party::UP, Party::CS, Party::CS];
        let data = TrainingSet::new(features, labels).unwrap();
        let model = BayesSpec::with_seed(0).fit(&data);
        let p = model.predict_proba(&[0.5, 0.85]);
        p.validate().unwrap();
        assert_eq!(p.argmax(), Party::CS);
    }

    #[test]
    fn probabilities_always_on_simplex() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let features: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..6).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<Party> = (0..40).map(|i| Party::ALL[i % 3]).collect();
        let data = TrainingSet::new(features, labels).unwrap();
        let model = BayesSpec::with_seed(0).fit(&data);
        for _ in 0..50 {
            let x: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
            model.predict_proba(&x).validate().unwrap();
        }
    }
}
