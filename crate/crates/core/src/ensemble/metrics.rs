//! Classification metrics: accuracy, macro precision/recall/F1 and
//! macro-averaged one-vs-rest ROC AUC (rank statistic with tie handling).

use serde::{Deserialize, Serialize};

use super::ProbabilityVector;
use crate::types::Party;

const K: usize = Party::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

/// Evaluate predicted probability vectors against true class indices.
/// Macro averages run over the classes present in `y_true`; AUC skips
/// classes without both positives and negatives.
pub fn evaluate(y_true: &[usize], probs: &[ProbabilityVector]) -> Scores {
    assert_eq!(y_true.len(), probs.len());
    let n = y_true.len();
    let predicted: Vec<usize> = probs.iter().map(|p| p.argmax().index()).collect();

    let mut confusion = [[0usize; K]; K];
    let mut correct = 0usize;
    for (t, p) in y_true.iter().zip(predicted.iter()) {
        confusion[*t][*p] += 1;
        if t == p {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / n as f64;

    let mut present = [false; K];
    for t in y_true {
        present[*t] = true;
    }

    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut class_count = 0usize;
    for k in 0..K {
        if !present[k] {
            continue;
        }
        class_count += 1;
        let tp = confusion[k][k] as f64;
        let fp: f64 = (0..K).filter(|j| *j != k).map(|j| confusion[j][k] as f64).sum();
        let fn_: f64 = (0..K).filter(|j| *j != k).map(|j| confusion[k][j] as f64).sum();
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }

    let mut auc_sum = 0.0;
    let mut auc_count = 0usize;
    for k in 0..K {
        let scores: Vec<f64> = probs.iter().map(|p| p.0[k]).collect();
        let is_pos: Vec<bool> = y_true.iter().map(|t| *t == k).collect();
        if let Some(auc) = rank_auc(&scores, &is_pos) {
            auc_sum += auc;
            auc_count += 1;
        }
    }

    let denom = class_count.max(1) as f64;
    Scores {
        accuracy,
        precision: precision_sum / denom,
        recall: recall_sum / denom,
        f1: f1_sum / denom,
        auc: if auc_count > 0 {
            auc_sum / auc_count as f64
        } else {
            f64::NAN
        },
    }
}

/// Mann–Whitney AUC with average ranks for tied scores. `None` when either
/// class is empty.
pub fn rank_auc(scores: &[f64], is_pos: &[bool]) -> Option<f64> {
    let n = scores.len();
    let n_pos = is_pos.iter().filter(|p| **p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|a, b| scores[*a].total_cmp(&scores[*b]));

    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are1-based; ties share the average rank of their block
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if is_pos[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prob_for(class: usize, confidence: f64) -> ProbabilityVector {
        let mut p = [(1.0 - confidence) / (K - 1) as f64; K];
        p[class] = confidence;
        ProbabilityVector(p)
    }

    #[test]
    fn perfect_predictions_score_one() {
        let y = vec![0, 1, 2, 3, 4, 0, 1, 2, 3, 4];
        let probs: Vec<ProbabilityVector> = y.iter().map(|c| prob_for(*c, 0.9)).collect();
        let s = evaluate(&y, &probs);
        assert_eq!(s.accuracy, 1.0);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 1.0);
        assert_eq!(s.f1, 1.0);
        assert_eq!(s.auc, 1.0);
    }

    #[test]
    fn all_wrong_scores_zero() {
        let y = vec![0, 0, 1, 1];
        let probs = vec![
            prob_for(1, 0.9),
            prob_for(1, 0.9),
            prob_for(0, 0.9),
            prob_for(0, 0.9),
        ];
        let s = evaluate(&y, &probs);
        assert_eq!(s.accuracy, 0.0);
        assert_eq!(s.precision, 0.0);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.auc, 0.0);
    }

    #[test]
    fn rank_auc_handles_ties_and_separation() {
        // perfectly separated
        let auc = rank_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap();
        assert_eq!(auc, 1.0);
        // all tied → 0.5
        let auc = rank_auc(&[0.5, 0.5, 0.5, 0.5], &[false, true, false, true]).unwrap();
        assert_eq!(auc, 0.5);
        // hand check: scores 0.1 0.4 0.4 0.9, pos at 0.4 and 0.9
        // ranks: 1, 2.5, 2.5, 4 → R+ = 2.5 + 4 = 6.5 → U = 6.5 − 3 = 3.5 → 3.5/4
        let auc = rank_auc(&[0.1, 0.4, 0.4, 0.9], &[false, true, false, true]).unwrap();
        assert!((auc - 3.5 / 4.0).abs() < 1e-12);
        // degenerate class splits
        assert!(rank_auc(&[0.1, 0.2], &[true, true]).is_none());
    }

    #[test]
    fn macro_metrics_on_imbalanced_mistakes() {
        // class 0: 2 rows both right; class 1: 2 rows, one misread as 0
        let y = vec![0, 0, 1, 1];
        let probs = vec![
            prob_for(0, 0.9),
            prob_for(0, 0.9),
            prob_for(1, 0.9),
            prob_for(0, 0.9),
        ];
        let s = evaluate(&y, &probs);
        assert!((s.accuracy - 0.75).abs() < 1e-12);
        // precision: class0 = 2/3, class1 = 1/1 → macro 5/6
        assert!((s.precision - 5.0 / 6.0).abs() < 1e-12);
        // recall: class0 = 1, class1 = 1/2 → macro 3/4
        assert!((s.recall - 0.75).abs() < 1e-12);
    }
}
