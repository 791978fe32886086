//! Percentile gate: turn per-user bot scores into human/uncertain/bot
//! classes.
//!
//! Humans sit strictly below the 75th percentile of the score distribution,
//! bots at or above the 95th, and everyone in between is uncertain. The
//! inclusive bot boundary (`score >= p95`) follows the reported results
//! rather than the stricter prose variant.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::stats;
use crate::types::{UserClass, UserId};

/// Class boundaries derived from the score distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateThresholds {
    pub p75: f64,
    pub p95: f64,
}

impl GateThresholds {
    pub fn new(p75: f64, p95: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p75) || !(0.0..=1.0).contains(&p95) || p75 > p95 {
            return Err(Error::config(format!(
                "thresholds must satisfy 0 <= p75 <= p95 <= 1, got ({p75}, {p95})"
            )));
        }
        Ok(GateThresholds { p75, p95 })
    }

    pub fn classify(&self, score: f64) -> UserClass {
        if score < self.p75 {
            UserClass::Human
        } else if score >= self.p95 {
            UserClass::Bot
        } else {
            UserClass::Uncertain
        }
    }
}

/// Linear-interpolation percentiles of the empirical score distribution.
pub fn compute_percentiles(scores: &[f64]) -> Result<GateThresholds> {
    if scores.is_empty() {
        return Err(Error::data("cannot compute percentiles of zero scores"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    GateThresholds::new(
        stats::quantile_sorted(&sorted, 0.75),
        stats::quantile_sorted(&sorted, 0.95),
    )
}

/// Gate outcome: per-class counts plus the thresholds used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub thresholds: GateThresholds,
    pub humans: usize,
    pub uncertain: usize,
    pub bots: usize,
    pub removed: usize,
}

impl GateResult {
    pub fn total(&self) -> usize {
        self.humans + self.uncertain + self.bots + self.removed
    }

    pub fn count(&self, class: UserClass) -> usize {
        match class {
            UserClass::Human => self.humans,
            UserClass::Uncertain => self.uncertain,
            UserClass::Bot => self.bots,
            UserClass::Removed => self.removed,
        }
    }
}

/// Classify every non-removed user by its score. Errors on a scored corpus
/// that still contains unscored, non-removed users.
pub fn classify_users(corpus: &mut Corpus, thresholds: GateThresholds) -> Result<GateResult> {
    let mut result = GateResult {
        thresholds,
        humans: 0,
        uncertain: 0,
        bots: 0,
        removed: 0,
    };
    for user in corpus.users.values() {
        if user.is_removed() {
            continue;
        }
        if user.bot_score.is_none() {
            return Err(Error::data(format!(
                "user {} has no bot score and is not removed; fetch scores first",
                user.uid
            )));
        }
    }
    for user in corpus.users.values_mut() {
        if user.is_removed() {
            result.removed += 1;
            continue;
        }
        let class = thresholds.classify(user.bot_score.unwrap());
        user.user_class = Some(class);
        match class {
            UserClass::Human => result.humans += 1,
            UserClass::Uncertain => result.uncertain += 1,
            UserClass::Bot => result.bots += 1,
            UserClass::Removed => unreachable!("classify never yields removed"),
        }
    }
    Ok(result)
}

/// Scores of all non-removed users, in deterministic uid order.
pub fn gateable_scores(corpus: &Corpus) -> Vec<f64> {
    corpus
        .users
        .values()
        .filter(|u| !u.is_removed())
        .filter_map(|u| u.bot_score)
        .collect()
}

/// One provider answer for a uid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreResponse {
    Score(f64),
    Unavailable,
}

/// Port for remote or file-backed score sources. `Err` means a transient
/// failure worth retrying; `Unavailable` is a definitive miss.
pub trait ScoreProvider {
    fn fetch(&mut self, uid: &UserId) -> Result<ScoreResponse>;
}

/// Retry policy for transient provider failures.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3 }
    }
}

/// Counters from a score-fetch pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReport {
    pub fetched: usize,
    pub already_scored: usize,
    pub unavailable_removed: usize,
    pub out_of_range: usize,
}

/// Attach provider scores to every unscored, non-removed user. Transient
/// failures are retried per policy; users whose score stays unavailable (or
/// arrives out of range) are flagged removed.
pub fn fetch_scores(
    corpus: &mut Corpus,
    provider: &mut dyn ScoreProvider,
    policy: RetryPolicy,
) -> FetchReport {
    let mut report = FetchReport::default();
    let uids: Vec<UserId> = corpus.users.keys().cloned().collect();
    for uid in uids {
        let user = corpus.users.get_mut(&uid).unwrap();
        if user.is_removed() {
            continue;
        }
        if user.bot_score.is_some() {
            report.already_scored += 1;
            continue;
        }
        let mut response = None;
        for attempt in 1..=policy.max_attempts.max(1) {
            match provider.fetch(&uid) {
                Ok(r) => {
                    response = Some(r);
                    break;
                }
                Err(e) => {
                    log::debug!("score fetch for {uid} failed (attempt {attempt}): {e}");
                }
            }
        }
        match response {
            Some(ScoreResponse::Score(s)) if (0.0..=1.0).contains(&s) => {
                user.bot_score = Some(s);
                report.fetched += 1;
            }
            Some(ScoreResponse::Score(s)) => {
                log::warn!("provider returned out-of-range score {s} for {uid}");
                report.out_of_range += 1;
                user.user_class = Some(UserClass::Removed);
                report.unavailable_removed += 1;
            }
            Some(ScoreResponse::Unavailable) | None => {
                user.user_class = Some(UserClass::Removed);
                report.unavailable_removed += 1;
            }
        }
    }
    report
}

/// File-backed score provider over `uid,score` CSV rows. Out-of-range rows
/// are rejected at load and counted.
#[derive(Debug, Clone)]
pub struct FileScoreProvider {
    scores: BTreeMap<UserId, f64>,
    pub rejected_rows: usize,
}

impl FileScoreProvider {
    pub fn from_path(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::data(format!("cannot open score file {}: {e}", path.display())))?;
        let mut scores = BTreeMap::new();
        let mut rejected_rows = 0;
        for record in reader.deserialize::<(String, f64)>() {
            match record {
                Ok((uid, score)) if (0.0..=1.0).contains(&score) => {
                    scores.insert(UserId::new(uid), score);
                }
                Ok((uid, score)) => {
                    log::warn!("rejecting score row {uid},{score}: outside [0, 1]");
                    rejected_rows += 1;
                }
                Err(e) => {
                    log::warn!("rejecting malformed score row: {e}");
                    rejected_rows += 1;
                }
            }
        }
        Ok(FileScoreProvider {
            scores,
            rejected_rows,
        })
    }

    pub fn from_map(scores: BTreeMap<UserId, f64>) -> Self {
        FileScoreProvider {
            scores,
            rejected_rows: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl ScoreProvider for FileScoreProvider {
    fn fetch(&mut self, uid: &UserId) -> Result<ScoreResponse> {
        Ok(match self.scores.get(uid) {
            Some(s) => ScoreResponse::Score(*s),
            None => ScoreResponse::Unavailable,
        })
    }
}
