//! Multilayer perceptron: one hidden layer of 100 ReLU units, softmax
//! output, trained full-batch for a fixed number of seeded Adam epochs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::types::Party;

const K: usize = Party::COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl MlpSpec {
    pub fn with_seed(seed: u64) -> Self {
        MlpSpec {
            hidden: 100,
            epochs: 200,
            learning_rate: 0.001,
            seed,
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> MlpModel {
        let n = data.len();
        let d = data.dim();
        let h = self.hidden;

        let x: Vec<f64> = data.features.iter().flatten().copied().collect();
        let mut y_onehot = vec![0.0f64; n * K];
        for (i, label) in data.labels.iter().enumerate() {
            y_onehot[i * K + label.index()] = 1.0;
        }

        // parameter layout: W1 (d×h) | b1 (h) | W2 (h×K) | b2 (K)
        let (w1_at, b1_at, w2_at, b2_at) = (0, d * h, d * h + h, d * h + h + h * K);
        let n_params = d * h + h + h * K + K;
        let mut params = vec![0.0f64; n_params];
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let limit1 = (6.0 / (d + h) as f64).sqrt();
        for w in &mut params[w1_at..b1_at] {
            *w = rng.gen_range(-limit1..limit1);
        }
        let limit2 = (6.0 / (h + K) as f64).sqrt();
        for w in &mut params[w2_at..b2_at] {
            *w = rng.gen_range(-limit2..limit2);
        }

        let mut adam = Adam::new(n_params, self.learning_rate);
        let mut grads = vec![0.0f64; n_params];
        let mut hidden = vec![0.0f64; n * h];
        let mut probs = vec![0.0f64; n * K];
        let mut d_out = vec![0.0f64; n * K];
        let mut d_hidden = vec![0.0f64; n * h];

        for _ in 0..self.epochs {
            let (w1, rest) = params.split_at(b1_at);
            let (b1, rest) = rest.split_at(h);
            let (w2, b2) = rest.split_at(h * K);

            // forward
            forward_hidden(&x, w1, b1, n, d, h, &mut hidden);
            forward_output(&hidden, w2, b2, n, h, &mut probs);

            // backward: d_out = (probs − y) / n
            for i in 0..n * K {
                d_out[i] = (probs[i] - y_onehot[i]) / n as f64;
            }
            grads.iter_mut().for_each(|g| *g = 0.0);
            {
                let (g_w1, g_rest) = grads.split_at_mut(b1_at);
                let (g_b1, g_rest) = g_rest.split_at_mut(h);
                let (g_w2, g_b2) = g_rest.split_at_mut(h * K);

                // g_w2 = hiddenᵀ · d_out ; g_b2 = column sums of d_out
                for i in 0..n {
                    for kk in 0..h {
                        let c = hidden[i * h + kk];
                        if c != 0.0 {
                            let row = &d_out[i * K..(i + 1) * K];
                            let out = &mut g_w2[kk * K..(kk + 1) * K];
                            for j in 0..K {
                                out[j] += c * row[j];
                            }
                        }
                    }
                    for j in 0..K {
                        g_b2[j] += d_out[i * K + j];
                    }
                }
                // d_hidden = d_out · W2ᵀ, masked by ReLU activity
                for i in 0..n {
                    let row = &d_out[i * K..(i + 1) * K];
                    for kk in 0..h {
                        if hidden[i * h + kk] > 0.0 {
                            let wrow = &w2[kk * K..(kk + 1) * K];
                            let mut s = 0.0;
                            for j in 0..K {
                                s += row[j] * wrow[j];
                            }
                            d_hidden[i * h + kk] = s;
                        } else {
                            d_hidden[i * h + kk] = 0.0;
                        }
                    }
                }
                // g_w1 = xᵀ · d_hidden ; g_b1 = column sums of d_hidden
                for i in 0..n {
                    for kk in 0..d {
                        let c = x[i * d + kk];
                        if c != 0.0 {
                            let row = &d_hidden[i * h..(i + 1) * h];
                            let out = &mut g_w1[kk * h..(kk + 1) * h];
                            for j in 0..h {
                                out[j] += c * row[j];
                            }
                        }
                    }
                    for j in 0..h {
                        g_b1[j] += d_hidden[i * h + j];
                    }
                }
            }
            adam.step(&mut params, &grads);
        }

        MlpModel {
            dim: d,
            hidden: h,
            w1: params[w1_at..b1_at].to_vec(),
            b1: params[b1_at..w2_at].to_vec(),
            w2: params[w2_at..b2_at].to_vec(),
            b2: params[b2_at..].to_vec(),
        }
    }
}

fn forward_hidden(x: &[f64], w1: &[f64], b1: &[f64], n: usize, d: usize, h: usize, out: &mut [f64]) {
    for i in 0..n {
        let row = &mut out[i * h..(i + 1) * h];
        row.copy_from_slice(b1);
        for kk in 0..d {
            let c = x[i * d + kk];
            if c != 0.0 {
                let wrow = &w1[kk * h..(kk + 1) * h];
                for j in 0..h {
                    row[j] += c * wrow[j];
                }
            }
        }
        for v in row.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
}

fn forward_output(hidden: &[f64], w2: &[f64], b2: &[f64], n: usize, h: usize, probs: &mut [f64]) {
    for i in 0..n {
        let row = &mut probs[i * K..(i + 1) * K];
        row.copy_from_slice(b2);
        for kk in 0..h {
            let c = hidden[i * h + kk];
            if c != 0.0 {
                let wrow = &w2[kk * K..(kk + 1) * K];
                for j in 0..K {
                    row[j] += c * wrow[j];
                }
            }
        }
        softmax_in_place(row);
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    dim: usize,
    hidden: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl Predictor for MlpModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        let h = self.hidden;
        let mut hidden = vec![0.0f64; h];
        forward_hidden(x, &self.w1, &self.b1, 1, self.dim, h, &mut hidden);
        let mut probs = [0.0f64; K];
        {
            let row = &mut probs[..];
            row.copy_from_slice(&self.b2);
            for kk in 0..h {
                let c = hidden[kk];
                if c != 0.0 {
                    let wrow = &self.w2[kk * K..(kk + 1) * K];
                    for j in 0..K {
                        row[j] += c * wrow[j];
                    }
                }
            }
            softmax_in_place(row);
        }
        ProbabilityVector::from_scores(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> TrainingSet {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let j = (i % 5) as f64 * 0.005;
            features.push(vec![0.1 + j, 0.9 - j, 0.5]);
            labels.push(Party::PSOE);
            features.push(vec![0.9 - j, 0.1 + j, 0.5]);
            labels.push(Party::CS);
        }
        TrainingSet::new(features, labels).unwrap()
    }

    #[test]
    fn learns_linearly_separable_blobs() {
        let spec = MlpSpec {
            hidden: 16,
            epochs: 200,
            learning_rate: 0.01,
            seed: 4,
        };
        let model = spec.fit(&blobs());
        let a = model.predict_proba(&[0.1, 0.9, 0.5]);
        let b = model.predict_proba(&[0.9, 0.1, 0.5]);
        assert_eq!(a.argmax(), Party::PSOE);
        assert_eq!(b.argmax(), Party::CS);
        assert!(a.get(Party::PSOE) > 0.9);
        a.validate().unwrap();
        b.validate().unwrap();
    }

    #[test]
    fn training_is_seed_deterministic() {
        let spec = MlpSpec {
            hidden: 8,
            epochs: 50,
            learning_rate: 0.01,
            seed: 11,
        };
        let a = spec.fit(&blobs());
        let b = spec.fit(&blobs());
        assert_eq!(a, b);
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let mut row = [1000.0, 0.0, -1000.0, 500.0, 999.0];
        softmax_in_place(&mut row);
        let sum: f64 = row.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|v| v.is_finite()));
    }
}
