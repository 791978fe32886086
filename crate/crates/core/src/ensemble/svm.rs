//! One-vs-rest support vector machine: RBF kernel, SMO optimizer with an
//! error cache (deterministic second-choice heuristic, no randomization),
//! and per-binary Platt sigmoid calibration, normalized across classes.
//!
//! `epsilon` is carried in the spec for completeness — it parameterizes the
//! regression variant and plays no role in classification.

use serde::{Deserialize, Serialize};

use super::{Predictor, ProbabilityVector, TrainingSet};
use crate::error::Result;
use crate::types::Party;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSpec {
    pub c: f64,
    pub tol: f64,
    /// Cap on optimizer passes over the working set.
    pub max_iter: usize,
    /// Recorded regression parameter; unused for classification.
    pub epsilon: f64,
    /// RBF width; `None` selects 1 / (dim · var(X)).
    pub gamma: Option<f64>,
    pub seed: u64,
}

impl SvmSpec {
    pub fn with_seed(seed: u64) -> Self {
        SvmSpec {
            c: 1.0,
            tol: 0.001,
            max_iter: 100,
            epsilon: 0.1,
            gamma: None,
            seed,
        }
    }

    pub fn fit(&self, data: &TrainingSet) -> Result<SvmModel> {
        let n = data.len();
        let gamma = self.gamma.unwrap_or_else(|| scale_gamma(data));
        let kernel = full_kernel(&data.features, gamma);

        let mut binaries: Vec<Option<BinarySvm>> = Vec::with_capacity(Party::COUNT);
        for party in Party::ALL {
            let y: Vec<f64> = data
                .labels
                .iter()
                .map(|l| if *l == party { 1.0 } else { -1.0 })
                .collect();
            let pos = y.iter().filter(|v| **v > 0.0).count();
            if pos == 0 || pos == n {
                binaries.push(None);
                continue;
            }
            let smo = Smo::run(&kernel, &y, self.c, self.tol, self.max_iter);
            // decision values on the training set for sigmoid calibration
            let decision: Vec<f64> = (0..n).map(|i| smo.errors[i] + y[i]).collect();
            let (platt_a, platt_b) = platt_fit(&decision, &y);

            let mut sv_x = Vec::new();
            let mut sv_coef = Vec::new();
            for i in 0..n {
                if smo.alpha[i] > 1e-10 {
                    sv_x.push(data.features[i].clone());
                    sv_coef.push(smo.alpha[i] * y[i]);
                }
            }
            binaries.push(Some(BinarySvm {
                sv_x,
                sv_coef,
                bias: smo.bias,
                platt_a,
                platt_b,
            }));
        }
        Ok(SvmModel { gamma, binaries })
    }
}

/// The `scale` heuristic: 1 / (dim · population variance of all entries).
fn scale_gamma(data: &TrainingSet) -> f64 {
    let d = data.dim() as f64;
    let count = (data.len() * data.dim()) as f64;
    let mean: f64 = data.features.iter().flatten().sum::<f64>() / count;
    let var: f64 = data
        .features
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / count;
    if var > 1e-12 {
        1.0 / (d * var)
    } else {
        1.0 / d
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn full_kernel(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut k = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in (i + 1)..n {
            let v = rbf(&x[i], &x[j], gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

struct Smo {
    alpha: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
}

impl Smo {
    fn run(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Smo {
        let n = y.len();
        let mut state = Smo {
            alpha: vec![0.0; n],
            errors: y.iter().map(|v| -v).collect(),
            bias: 0.0,
        };
        let mut examine_all = true;
        for _pass in 0..max_iter {
            let mut changed = 0usize;
            if examine_all {
                for i in 0..n {
                    changed += state.examine(i, kernel, y, c, tol);
                }
            } else {
                for i in 0..n {
                    if state.alpha[i] > 0.0 && state.alpha[i] < c {
                        changed += state.examine(i, kernel, y, c, tol);
                    }
                }
            }
            if examine_all {
                if changed == 0 {
                    break;
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        state
    }

    fn examine(&mut self, i2: usize, kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> usize {
        let e2 = self.errors[i2];
        let r2 = e2 * y[i2];
        let a2 = self.alpha[i2];
        if !((r2 < -tol && a2 < c) || (r2 > tol && a2 > 0.0)) {
            return 0;
        }
        let n = y.len();

        // best |E1 − E2| among non-bound multipliers
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if self.alpha[i] > 0.0 && self.alpha[i] < c {
                let gap = (self.errors[i] - e2).abs();
                if best.map_or(true, |(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2, kernel, y, c) {
                return 1;
            }
        }
        for i1 in 0..n {
            if self.alpha[i1] > 0.0 && self.alpha[i1] < c && self.take_step(i1, i2, kernel, y, c) {
                return 1;
            }
        }
        for i1 in 0..n {
            if self.take_step(i1, i2, kernel, y, c) {
                return 1;
            }
        }
        0
    }

    fn take_step(&mut self, i1: usize, i2: usize, kernel: &[Vec<f64>], y: &[f64], c: f64) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (y[i1], y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), (c + a2 - a1).min(c))
        } else {
            ((a1 + a2 - c).max(0.0), (a1 + a2).min(c))
        };
        if lo >= hi {
            return false;
        }

        let k11 = kernel[i1][i1];
        let k12 = kernel[i1][i2];
        let k22 = kernel[i2][i2];
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            return false;
        }
        let mut a2_new = a2 + y2 * (e1 - e2) / eta;
        a2_new = a2_new.clamp(lo, hi);
        if (a2_new - a2).abs() < 1e-8 * (a2_new + a2 + 1e-8) {
            return false;
        }
        let a1_new = (a1 + s * (a2 - a2_new)).clamp(0.0, c);

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let b_new = if a1_new > 0.0 && a1_new < c {
            b1
        } else if a2_new > 0.0 && a2_new < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.bias;

        let row1 = &kernel[i1];
        let row2 = &kernel[i2];
        for i in 0..y.len() {
            self.errors[i] += d1 * row1[i] + d2 * row2[i] + db;
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        self.bias = b_new;
        true
    }
}

/// Sigmoid calibration: fit `P(y=1|f) = 1 / (1 + exp(A f + B))` by Newton
/// iterations with backtracking over the regularized likelihood.
fn platt_fit(decision: &[f64], y: &[f64]) -> (f64, f64) {
    let n = decision.len();
    let prior1 = y.iter().filter(|v| **v > 0.0).count() as f64;
    let prior0 = n as f64 - prior1;
    let hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    let lo_target = 1.0 / (prior0 + 2.0);
    let targets: Vec<f64> = y
        .iter()
        .map(|v| if *v > 0.0 { hi_target } else { lo_target })
        .collect();

    let sigma = 1e-12;
    let mut a = 0.0f64;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();

    let fval = |a: f64, b: f64| -> f64 {
        let mut f = 0.0;
        for i in 0..n {
            let f_ab = decision[i] * a + b;
            f += if f_ab >= 0.0 {
                targets[i] * f_ab + (1.0 + (-f_ab).exp()).ln()
            } else {
                (targets[i] - 1.0) * f_ab + (1.0 + f_ab.exp()).ln()
            };
        }
        f
    };
    let mut f_cur = fval(a, b);

    for _ in 0..100 {
        // gradient and Hessian of the regularized objective
        let (mut h11, mut h22) = (sigma, sigma);
        let mut h21 = 0.0;
        let (mut g1, mut g2) = (0.0, 0.0);
        for i in 0..n {
            let f_ab = decision[i] * a + b;
            let (p, q) = if f_ab >= 0.0 {
                let e = (-f_ab).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f_ab.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            let d1 = targets[i] - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = 1.0f64;
        let mut applied = false;
        while step >= 1e-10 {
            let a_new = a + step * da;
            let b_new = b + step * db;
            let f_new = fval(a_new, b_new);
            if f_new < f_cur + 1e-4 * step * gd {
                a = a_new;
                b = b_new;
                f_cur = f_new;
                applied = true;
                break;
            }
            step /= 2.0;
        }
        if !applied {
            break;
        }
    }
    (a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BinarySvm {
    sv_x: Vec<Vec<f64>>,
    sv_coef: Vec<f64>,
    bias: f64,
    platt_a: f64,
    platt_b: f64,
}

impl BinarySvm {
    fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        let mut s = self.bias;
        for (sv, coef) in self.sv_x.iter().zip(self.sv_coef.iter()) {
            s += coef * rbf(sv, x, gamma);
        }
        s
    }

    fn probability(&self, x: &[f64], gamma: f64) -> f64 {
        let f_ab = self.platt_a * self.decision(x, gamma) + self.platt_b;
        if f_ab >= 0.0 {
            (-f_ab).exp() / (1.0 + (-f_ab).exp())
        } else {
            1.0 / (1.0 + f_ab.exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    gamma: f64,
    binaries: Vec<Option<BinarySvm>>,
}

impl Predictor for SvmModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        let mut scores = [0.0f64; Party::COUNT];
        for (k, binary) in self.binaries.iter().enumerate() {
            if let Some(b) = binary {
                scores[k] = b.probability(x, self.gamma);
            }
        }
        ProbabilityVector::from_scores(scores)
    }
}
