//! Reject-option ensemble over six first-party classifiers.
//!
//! All six models train behind a common train/predict-proba port and emit
//! probability vectors over the five parties. Fusion is the per-party
//! arithmetic mean of the six outputs; a bot is labeled with a single party
//! when the fused maximum clears the threshold δ = 1 − 1/|ℙ|, with the
//! two-party cumulative rule as fallback, and rejected ("Unknown")
//! otherwise.

pub mod bayes;
pub mod boost;
pub mod cv;
pub mod forest;
pub mod knn;
pub mod metrics;
pub mod mlp;
pub mod svm;
pub mod tree;

pub use cv::{cross_validate, stratified_folds, CvReport, ModelReport};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::FeatureVector;
use crate::types::{Party, UserId};

/// Probability distribution over the five parties in canonical ℙ order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector(pub [f64; Party::COUNT]);

impl ProbabilityVector {
    pub fn uniform() -> Self {
        ProbabilityVector([1.0 / Party::COUNT as f64; Party::COUNT])
    }

    /// Normalize non-negative scores onto the simplex; an all-zero input
    /// falls back to the uniform distribution.
    pub fn from_scores(scores: [f64; Party::COUNT]) -> Self {
        let sum: f64 = scores.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Self::uniform();
        }
        let mut out = scores;
        for v in &mut out {
            *v /= sum;
        }
        ProbabilityVector(out)
    }

    pub fn get(&self, party: Party) -> f64 {
        self.0[party.index()]
    }

    /// Highest-probability party; ties break to the earlier canonical party.
    pub fn argmax(&self) -> Party {
        let mut best = Party::ALL[0];
        for party in Party::ALL {
            if self.get(party) > self.get(best) {
                best = party;
            }
        }
        best
    }

    /// The two largest entries ordered by descending probability, ties by
    /// canonical ℙ order.
    pub fn top_two(&self) -> ((Party, f64), (Party, f64)) {
        let mut order = Party::ALL;
        order.sort_by(|a, b| {
            self.get(*b)
                .partial_cmp(&self.get(*a))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.index().cmp(&b.index()))
        });
        (
            (order[0], self.get(order[0])),
            (order[1], self.get(order[1])),
        )
    }

    /// Probability contract: entries in `[0, 1]`, summing to 1 ± 1e-9.
    pub fn validate(&self) -> Result<()> {
        for (party, v) in Party::ALL.iter().zip(self.0.iter()) {
            if !(0.0..=1.0).contains(v) || !v.is_finite() {
                return Err(Error::data(format!(
                    "probability for {party} is {v}, outside [0, 1]"
                )));
            }
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::data(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Labeled feature rows for training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Party>,
}

impl TrainingSet {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Party>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::data("training set is empty"));
        }
        if features.len() != labels.len() {
            return Err(Error::data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features[0].len();
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::data(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("row {i} contains a non-finite feature")));
            }
        }
        Ok(TrainingSet { features, labels })
    }

    /// Join exported feature vectors with a uid → party label map. Rows
    /// without a label are skipped.
    pub fn from_features(
        vectors: &[FeatureVector],
        labels: &BTreeMap<UserId, Party>,
    ) -> Result<Self> {
        let mut features = Vec::new();
        let mut ys = Vec::new();
        for v in vectors {
            if let Some(party) = labels.get(&v.uid) {
                features.push(v.values.clone());
                ys.push(*party);
            }
        }
        TrainingSet::new(features, ys)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Per-party row counts in canonical order (the balance report).
    pub fn class_counts(&self) -> [usize; Party::COUNT] {
        let mut counts = [0usize; Party::COUNT];
        for y in &self.labels {
            counts[y.index()] += 1;
        }
        counts
    }

    pub fn distinct_classes(&self) -> usize {
        self.class_counts().iter().filter(|c| **c > 0).count()
    }

    pub(crate) fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|p| p.index()).collect()
    }

    fn subset(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            features: indices.iter().map(|i| self.features[*i].clone()).collect(),
            labels: indices.iter().map(|i| self.labels[*i]).collect(),
        }
    }
}

/// Anything that maps a feature row to party probabilities.
pub trait Predictor {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector;
}

/// Seeded specification of one classifier, hyperparameters at their
/// reference defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    RandomForest(forest::ForestSpec),
    Mlp(mlp::MlpSpec),
    Svm(svm::SvmSpec),
    NaiveBayes(bayes::BayesSpec),
    Knn(knn::KnnSpec),
    AdaBoost(boost::BoostSpec),
}

impl ClassifierSpec {
    /// The six reference classifiers with per-model seeds derived from one
    /// base seed.
    pub fn default_suite(seed: u64) -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::RandomForest(forest::ForestSpec::with_seed(mix_seed(seed, 1))),
            ClassifierSpec::Mlp(mlp::MlpSpec::with_seed(mix_seed(seed, 2))),
            ClassifierSpec::Svm(svm::SvmSpec::with_seed(mix_seed(seed, 3))),
            ClassifierSpec::NaiveBayes(bayes::BayesSpec::with_seed(mix_seed(seed, 4))),
            ClassifierSpec::Knn(knn::KnnSpec::with_seed(mix_seed(seed, 5))),
            ClassifierSpec::AdaBoost(boost::BoostSpec::with_seed(mix_seed(seed, 6))),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::RandomForest(_) => "random_forest",
            ClassifierSpec::Mlp(_) => "mlp",
            ClassifierSpec::Svm(_) => "svm",
            ClassifierSpec::NaiveBayes(_) => "naive_bayes",
            ClassifierSpec::Knn(_) => "knn",
            ClassifierSpec::AdaBoost(_) => "adaboost",
        }
    }

    pub fn reseeded(&self, seed: u64) -> ClassifierSpec {
        let mut spec = self.clone();
        match &mut spec {
            ClassifierSpec::RandomForest(s) => s.seed = seed,
            ClassifierSpec::Mlp(s) => s.seed = seed,
            ClassifierSpec::Svm(s) => s.seed = seed,
            ClassifierSpec::NaiveBayes(s) => s.seed = seed,
            ClassifierSpec::Knn(s) => s.seed = seed,
            ClassifierSpec::AdaBoost(s) => s.seed = seed,
        }
        spec
    }

    /// Train a model. Errors on an effectively single-class training set or
    /// non-finite features.
    pub fn train(&self, data: &TrainingSet) -> Result<TrainedModel> {
        if data.is_empty() {
            return Err(Error::data("cannot train on an empty set"));
        }
        if data.distinct_classes() < 2 {
            return Err(Error::data(
                "training set holds a single class; need at least two",
            ));
        }
        for (i, row) in data.features.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("row {i} contains a non-finite feature")));
            }
        }
        Ok(match self {
            ClassifierSpec::RandomForest(s) => TrainedModel::RandomForest(s.fit(data)),
            ClassifierSpec::Mlp(s) => TrainedModel::Mlp(s.fit(data)),
            ClassifierSpec::Svm(s) => TrainedModel::Svm(s.fit(data)?),
            ClassifierSpec::NaiveBayes(s) => TrainedModel::NaiveBayes(s.fit(data)),
            ClassifierSpec::Knn(s) => TrainedModel::Knn(s.fit(data)?),
            ClassifierSpec::AdaBoost(s) => TrainedModel::AdaBoost(s.fit(data)),
        })
    }
}

pub(crate) fn mix_seed(base: u64, salt: u64) -> u64 {
    // splitmix64 step over base ^ salt
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A trained classifier with its learned parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    RandomForest(forest::ForestModel),
    Mlp(mlp::MlpModel),
    Svm(svm::SvmModel),
    NaiveBayes(bayes::BayesModel),
    Knn(knn::KnnModel),
    AdaBoost(boost::BoostModel),
}

impl Predictor for TrainedModel {
    fn predict_proba(&self, x: &[f64]) -> ProbabilityVector {
        match self {
            TrainedModel::RandomForest(m) => m.predict_proba(x),
            TrainedModel::Mlp(m) => m.predict_proba(x),
            TrainedModel::Svm(m) => m.predict_proba(x),
            TrainedModel::NaiveBayes(m) => m.predict_proba(x),
            TrainedModel::Knn(m) => m.predict_proba(x),
            TrainedModel::AdaBoost(m) => m.predict_proba(x),
        }
    }
}

/// Per-party arithmetic mean of the member outputs. Means of simplex points
/// stay on the simplex, so no renormalization happens here.
pub fn fuse_probs(outputs: &[ProbabilityVector]) -> Result<ProbabilityVector> {
    if outputs.is_empty() {
        return Err(Error::data("cannot fuse zero probability vectors"));
    }
    let mut fused = [0.0f64; Party::COUNT];
    for out in outputs {
        for (acc, v) in fused.iter_mut().zip(out.0.iter()) {
            *acc += v;
        }
    }
    for v in &mut fused {
        *v /= outputs.len() as f64;
    }
    Ok(ProbabilityVector(fused))
}

/// Evaluate every model on `x` and fuse.
pub fn fuse<P: Predictor>(models: &[P], x: &[f64]) -> Result<ProbabilityVector> {
    let outputs: Vec<ProbabilityVector> =
        models.iter().map(|m| m.predict_proba(x)).collect();
    fuse_probs(&outputs)
}

/// Rejection threshold δ = 1 − 1/|ℙ|.
pub fn rejection_threshold(n_parties: usize) -> Result<f64> {
    if n_parties == 0 {
        return Err(Error::config("threshold needs at least one party"));
    }
    Ok(1.0 - 1.0 / n_parties as f64)
}

/// Ensemble verdict for one bot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AffinityKind {
    Single { party: Party },
    Pair { first: Party, second: Party },
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityDecision {
    pub kind: AffinityKind,
    pub fused: ProbabilityVector,
    pub threshold: f64,
}

impl AffinityDecision {
    /// Single-party label, if any.
    pub fn single_party(&self) -> Option<Party> {
        match self.kind {
            AffinityKind::Single { party } => Some(party),
            _ => None,
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self.kind, AffinityKind::Rejected)
    }
}

/// Apply the reject-option rule: accept the argmax party when it exceeds δ;
/// otherwise accept the top-2 pair when the cumulative sum exceeds δ;
/// otherwise reject. Ties break by canonical ℙ order.
pub fn decide_affinity(fused: &ProbabilityVector, threshold: f64) -> Result<AffinityDecision> {
    fused.validate()?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::config(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let ((first, p1), (second, p2)) = fused.top_two();
    let kind = if p1 > threshold {
        AffinityKind::Single { party: first }
    } else if p1 + p2 > threshold {
        AffinityKind::Pair { first, second }
    } else {
        AffinityKind::Rejected
    };
    Ok(AffinityDecision {
        kind,
        fused: *fused,
        threshold,
    })
}

/// 6×6 tally of decisions: rows are the first identified party, columns the
/// second; the diagonal holds single-party bots and (Unknown, Unknown) the
/// rejected ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    counts: [[usize; Party::COUNT + 1]; Party::COUNT + 1],
}

impl AffinityMatrix {
    pub const UNKNOWN: usize = Party::COUNT;

    pub fn axis_labels() -> Vec<&'static str> {
        let mut labels: Vec<&'static str> = Party::ALL.iter().map(|p| p.name()).collect();
        labels.push("Unknown");
        labels
    }

    pub fn record(&mut self, decision: &AffinityDecision) {
        let (row, col) = match decision.kind {
            AffinityKind::Single { party } => (party.index(), party.index()),
            AffinityKind::Pair { first, second } => (first.index(), second.index()),
            AffinityKind::Rejected => (Self::UNKNOWN, Self::UNKNOWN),
        };
        self.counts[row][col] += 1;
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        self.counts[row][col]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn rejected(&self) -> usize {
        self.counts[Self::UNKNOWN][Self::UNKNOWN]
    }

    pub fn diagonal_total(&self) -> usize {
        (0..Party::COUNT).map(|i| self.counts[i][i]).sum()
    }
}

/// Classify a batch of eligible bots: fuse the six models per bot, decide,
/// and tally the affinity matrix.
pub fn classify_bots<P: Predictor + Sync>(
    models: &[P],
    vectors: &[FeatureVector],
    threshold: f64,
) -> Result<(BTreeMap<UserId, AffinityDecision>, AffinityMatrix)> {
    let decided: Vec<(UserId, AffinityDecision)> = vectors
        .par_iter()
        .map(|v| {
            let fused = fuse(models, &v.values)?;
            Ok((v.uid.clone(), decide_affinity(&fused, threshold)?))
        })
        .collect::<Result<_>>()?;
    let mut matrix = AffinityMatrix::default();
    let mut decisions = BTreeMap::new();
    for (uid, decision) in decided {
        matrix.record(&decision);
        decisions.insert(uid, decision);
    }
    Ok((decisions, matrix))
}

/// Serialized seeded specs plus learned parameters, versioned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub seed: u64,
    pub specs: Vec<ClassifierSpec>,
    pub models: Vec<TrainedModel>,
}

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

impl ModelBundle {
    /// Train the default six-model suite.
    pub fn train(seed: u64, data: &TrainingSet) -> Result<Self> {
        let specs = ClassifierSpec::default_suite(seed);
        let models: Vec<TrainedModel> = specs
            .par_iter()
            .map(|spec| spec.train(data))
            .collect::<Result<_>>()?;
        Ok(ModelBundle {
            format_version: BUNDLE_FORMAT_VERSION,
            seed,
            specs,
            models,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bundle: ModelBundle = serde_json::from_slice(&fs::read(path).map_err(|e| {
            Error::data(format!("cannot read model bundle {}: {e}", path.display()))
        })?)?;
        if bundle.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported bundle format version {}",
                bundle.format_version
            )));
        }
        if bundle.specs.len() != bundle.models.len() {
            return Err(Error::data("bundle specs and models differ in length"));
        }
        Ok(bundle)
    }
}

/// Write decisions as CSV: `uid,kind,party1,party2,p_UP,p_PSOE,p_CS,p_PP,p_VOX,delta`.
pub fn save_decisions(
    path: &Path,
    decisions: &BTreeMap<UserId, AffinityDecision>,
) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let probs_header: Vec<String> = Party::ALL.iter().map(|p| format!("p_{}", p.name())).collect();
    writeln!(out, "uid,kind,party1,party2,{},delta", probs_header.join(","))?;
    for (uid, d) in decisions {
        let (kind, p1, p2) = match d.kind {
            AffinityKind::Single { party } => ("single", party.name(), ""),
            AffinityKind::Pair { first, second } => ("pair", first.name(), second.name()),
            AffinityKind::Rejected => ("rejected", "", ""),
        };
        let probs: Vec<String> = d.fused.0.iter().map(|v| format!("{v}")).collect();
        writeln!(
            out,
            "{uid},{kind},{p1},{p2},{},{}",
            probs.join(","),
            d.threshold
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Read a decisions CSV back into memory.
pub fn load_decisions(path: &Path) -> Result<BTreeMap<UserId, AffinityDecision>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open decisions {}: {e}", path.display())))?;
    let mut decisions = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 4 + Party::COUNT + 1 {
            return Err(Error::data(format!(
                "decision row has {} columns",
                record.len()
            )));
        }
        let uid = UserId::new(record[0].to_owned());
        let parse_party = |s: &str| -> Result<Party> {
            Party::from_name(s).ok_or_else(|| Error::data(format!("unknown party {s:?}")))
        };
        let kind = match &record[1] {
            "single" => AffinityKind::Single {
                party: parse_party(&record[2])?,
            },
            "pair" => AffinityKind::Pair {
                first: parse_party(&record[2])?,
                second: parse_party(&record[3])?,
            },
            "rejected" => AffinityKind::Rejected,
            other => return Err(Error::data(format!("unknown decision kind {other:?}"))),
        };
        let mut probs = [0.0f64; Party::COUNT];
        for (i, p) in probs.iter_mut().enumerate() {
            *p = record[4 + i]
                .parse()
                .map_err(|e| Error::data(format!("bad probability: {e}")))?;
        }
        let threshold: f64 = record[4 + Party::COUNT]
            .parse()
            .map_err(|e| Error::data(format!("bad threshold: {e}")))?;
        decisions.insert(
            uid,
            AffinityDecision {
                kind,
                fused: ProbabilityVector(probs),
                threshold,
            },
        );
    }
    Ok(decisions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_formula() {
        assert_eq!(rejection_threshold(5).unwrap(), 0.8);
        assert_eq!(rejection_threshold(2).unwrap(), 0.5);
        assert_eq!(rejection_threshold(1).unwrap(), 0.0);
        assert!(rejection_threshold(0).is_err());
    }

    #[test]
    fn fuse_is_idempotent_on_identical_outputs() {
        let v = ProbabilityVector([0.1, 0.2, 0.3, 0.25, 0.15]);
        let fused = fuse_probs(&[v; 6]).unwrap();
        for (a, b) in fused.0.iter().zip(v.0.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fuse_two_model_desk_case() {
        let a = ProbabilityVector([0.0, 1.0, 0.0, 0.0, 0.0]); // all PSOE
        let b = ProbabilityVector([1.0, 0.0, 0.0, 0.0, 0.0]); // all UP
        let fused = fuse_probs(&[a, b]).unwrap();
        assert_eq!(fused.get(Party::PSOE), 0.5);
        assert_eq!(fused.get(Party::UP), 0.5);
        assert!(fuse_probs(&[]).is_err());
    }

    #[test]
    fn decide_worked_pair_example() {
        // fused {PSOE: 0.5, UP: 0.45, rest tiny} at δ = 0.8 → pair PSOE-UP
        // with cumulative 0.95
        let fused = ProbabilityVector([0.45, 0.5, 0.05 / 3.0, 0.05 / 3.0, 0.05 / 3.0]);
        let d = decide_affinity(&fused, 0.8).unwrap();
        match d.kind {
            AffinityKind::Pair { first, second } => {
                assert_eq!(first, Party::PSOE);
                assert_eq!(second, Party::UP);
                assert!(fused.get(first) + fused.get(second) > 0.94);
            }
            other => panic!("expected pair, got {other:?}"),
        }
    }

    #[test]
    fn decide_single_and_rejected() {
        let single = ProbabilityVector([0.0475, 0.0475, 0.0475, 0.0475, 0.81]);
        assert_eq!(
            decide_affinity(&single, 0.8).unwrap().kind,
            AffinityKind::Single { party: Party::VOX }
        );
        let uniform = ProbabilityVector::uniform();
        assert!(decide_affinity(&uniform, 0.8).unwrap().is_rejected());
    }

    #[test]
    fn decide_breaks_ties_canonically() {
        let tied = ProbabilityVector([0.4, 0.4, 0.2, 0.0, 0.0]);
        let d = decide_affinity(&tied, 0.5).unwrap();
        assert_eq!(
            d.kind,
            AffinityKind::Pair {
                first: Party::UP,
                second: Party::PSOE
            }
        );
    }

    #[test]
    fn decide_rejects_malformed_vectors() {
        let bad = ProbabilityVector([0.9, 0.9, 0.0, 0.0, 0.0]);
        assert!(decide_affinity(&bad, 0.8).is_err());
        let negative = ProbabilityVector([-0.1, 0.4, 0.3, 0.2, 0.2]);
        assert!(decide_affinity(&negative, 0.8).is_err());
    }

    #[test]
    fn decision_soundness_on_random_vectors() {
        // every accepted decision must satisfy its threshold inequality when
        // rechecked from the stored fused vector
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..500 {
            let mut raw = [0.0f64; Party::COUNT];
            for v in &mut raw {
                *v = rng.gen::<f64>();
            }
            let fused = ProbabilityVector::from_scores(raw);
            let d = decide_affinity(&fused, 0.8).unwrap();
            match d.kind {
                AffinityKind::Single { party } => assert!(d.fused.get(party) > d.threshold),
                AffinityKind::Pair { first, second } => {
                    assert!(d.fused.get(first) + d.fused.get(second) > d.threshold);
                    assert!(d.fused.get(first) <= d.threshold);
                }
                AffinityKind::Rejected => {
                    let ((_, p1), (_, p2)) = d.fused.top_two();
                    assert!(p1 + p2 <= d.threshold);
                }
            }
        }
    }

    #[test]
    fn matrix_tallies_by_kind() {
        let mut m = AffinityMatrix::default();
        let mk = |kind| AffinityDecision {
            kind,
            fused: ProbabilityVector::uniform(),
            threshold: 0.8,
        };
        m.record(&mk(AffinityKind::Single { party: Party::PP }));
        m.record(&mk(AffinityKind::Pair {
            first: Party::PSOE,
            second: Party::UP,
        }));
        m.record(&mk(AffinityKind::Rejected));
        assert_eq!(m.get(Party::PP.index(), Party::PP.index()), 1);
        assert_eq!(m.get(Party::PSOE.index(), Party::UP.index()), 1);
        assert_eq!(m.rejected(), 1);
        assert_eq!(m.total(), 3);
        assert_eq!(m.diagonal_total(), 1);
    }

    #[test]
    fn argmax_invariance_under_shared_rescaling() {
        // multiplying all model outputs by a shared positive factor and
        // renormalizing must leave the chosen party set unchanged
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut outs = Vec::new();
            for _ in 0..6 {
                let mut raw = [0.0f64; Party::COUNT];
                for v in &mut raw {
                    *v = rng.gen::<f64>();
                }
                outs.push(ProbabilityVector::from_scores(raw));
            }
            let fused = fuse_probs(&outs).unwrap();
            let base = decide_affinity(&fused, 0.8).unwrap();

            let scaled: Vec<ProbabilityVector> = outs
                .iter()
                .map(|o| {
                    let mut raw = o.0;
                    for v in &mut raw {
                        *v *= 3.5;
                    }
                    ProbabilityVector::from_scores(raw)
                })
                .collect();
            let fused2 = fuse_probs(&scaled).unwrap();
            let again = decide_affinity(&fused2, 0.8).unwrap();
            assert_eq!(base.kind, again.kind);
        }
    }
}
