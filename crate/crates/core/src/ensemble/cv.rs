//! Seeded stratified k-fold cross-validation over the classifier suite.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Scores};
use super::{mix_seed, ClassifierSpec, Predictor, ProbabilityVector, TrainingSet};
use crate::error::{Error, Result};
use crate::types::Party;

/// Stratified fold assignment: per-class index lists are shuffled under the
/// seed and dealt round-robin, so every fold holds (nearly) the same class
/// mix. Errors when any present class has fewer rows than folds.
pub fn stratified_folds(labels: &[Party], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::config("cross-validation needs at least 2 folds"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); folds];
    for party in Party::ALL {
        let mut indices: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == party)
            .map(|(i, _)| i)
            .collect();
        if indices.is_empty() {
            continue;
        }
        if indices.len() < folds {
            return Err(Error::data(format!(
                "class {party} has {} rows but {folds} folds were requested; \
                 lower the fold count or add rows for that class",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignment[pos % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

/// Fold-averaged metrics for one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub mean: Scores,
    pub per_fold: Vec<Scores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub models: Vec<ModelReport>,
}

impl CvReport {
    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.name == name)
    }

    /// CSV rows: `model,accuracy,precision,recall,f1,auc`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,accuracy,precision,recall,f1,auc\n");
        for m in &self.models {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m.name, m.mean.accuracy, m.mean.precision, m.mean.recall, m.mean.f1, m.mean.auc
            ));
        }
        out
    }
}

/// Run seeded stratified cross-validation for every spec. Per-(model, fold)
/// training uses a seed derived from the CV seed, so reports are
/// reproducible end to end.
pub fn cross_validate(
    specs: &[ClassifierSpec],
    data: &TrainingSet,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    let fold_sets = stratified_folds(&data.labels, folds, seed)?;
    let all: Vec<usize> = (0..data.len()).collect();

    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..folds).map(move |f| (s, f)))
        .collect();
    let results: Vec<(usize, usize, Scores)> = jobs
        .par_iter()
        .map(|(spec_idx, fold_idx)| {
            let test_idx = &fold_sets[*fold_idx];
            let train_idx: Vec<usize> = all
                .iter()
                .filter(|i| !test_idx.contains(i))
                .copied()
                .collect();
            let train = data.subset_for_cv(&train_idx);
            let spec = specs[*spec_idx]
                .reseeded(mix_seed(seed, (*spec_idx as u64) << 16 | *fold_idx as u64));
            let model = spec.train(&train)?;
            let probs: Vec<ProbabilityVector> = test_idx
                .iter()
                .map(|i| model.predict_proba(&data.features[*i]))
                .collect();
            let y_true: Vec<usize> = test_idx.iter().map(|i| data.labels[*i].index()).collect();
            Ok((*spec_idx, *fold_idx, evaluate(&y_true, &probs)))
        })
        .collect::<Result<_>>()?;

    let mut models = Vec::with_capacity(specs.len());
    for (spec_idx, spec) in specs.iter().enumerate() {
        let mut per_fold: Vec<(usize, Scores)> = results
            .iter()
            .filter(|(s, _, _)| *s == spec_idx)
            .map(|(_, f, sc)| (*f, *sc))
            .collect();
        per_fold.sort_by_key(|(f, _)| *f);
        let per_fold: Vec<Scores> = per_fold.into_iter().map(|(_, s)| s).collect();
        let mean = Scores {
            accuracy: per_fold.iter().map(|s| s.accuracy).sum::<f64>() / folds as f64,
            precision: per_fold.iter().map(|s| s.precision).sum::<f64>() / folds as f64,
            recall: per_fold.iter().map(|s| s.recall).sum::<f64>() / folds as f64,
            f1: per_fold.iter().map(|s| s.f1).sum::<f64>() / folds as f64,
            auc: per_fold.iter().map(|s| s.auc).sum::<f64>() / folds as f64,
        };
        models.push(ModelReport {
            name: spec.name().to_owned(),
            mean,
            per_fold,
        });
    }
    Ok(CvReport {
        folds,
        seed,
        models,
    })
}

impl TrainingSet {
    fn subset_for_cv(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            features: indices.iter().map(|i| self.features[*i].clone()).collect(),
            labels: indices.iter().map(|i| self.labels[*i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified_and_cover_everything() {
        let labels: Vec<Party> = (0..50).map(|i| Party::ALL[i % 5]).collect();
        let folds = stratified_folds(&labels, 5, 42).unwrap();
        let mut seen = vec![false; 50];
        for fold in &folds {
            assert_eq!(fold.len(), 10);
            let mut counts = [0usize; 5];
            for &i in fold {
                assert!(!seen[i]);
                seen[i] = true;
                counts[labels[i].index()] += 1;
            }
            assert_eq!(counts, [2, 2, 2, 2, 2]);
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn folds_are_seed_deterministic() {
        let labels: Vec<Party> = (0..40).map(|i| Party::ALL[i % 4]).collect();
        assert_eq!(
            stratified_folds(&labels, 4, 9).unwrap(),
            stratified_folds(&labels, 4, 9).unwrap()
        );
        assert_ne!(
            stratified_folds(&labels, 4, 9).unwrap(),
            stratified_folds(&labels, 4, 10).unwrap()
        );
    }

    #[test]
    fn too_few_rows_per_class_is_an_error() {
        let labels = vec![Party::UP, Party::UP, Party::VOX];
        let err = stratified_folds(&labels, 3, 1).unwrap_err();
        assert!(err.to_string().contains("VOX"));
    }
}
