//! Per-user average-sentiment features.
//!
//! A feature vector holds, per user, the mean sentiment of their tweets for
//! every (tweet type, party) pair — 20 cells — and for every (tweet type,
//! party, theme) triple — 100 cells. Only tweets carrying the exclusive
//! single-party label contribute; the theme condition additionally requires
//! the theme hit, and is not exclusive. Empty cells are imputed neutral 0.5
//! with a support count of zero so downstream analysis can tell them apart.
//!
//! Canonical cell order is tweet type major (Π order), then party (ℙ order),
//! then theme (Γ order); the 20 pair cells precede the 100 triple cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{Party, Theme, TweetType, UserClass, UserId};

/// Length of the feature vector: |Π|·|ℙ| + |Π|·|ℙ|·|Γ| = 20 + 100.
pub const FEATURE_DIM: usize =
    TweetType::COUNT * Party::COUNT + TweetType::COUNT * Party::COUNT * Theme::COUNT;

/// Neutral value imputed into cells with no contributing tweets.
pub const NEUTRAL_FILL: f64 = 0.5;

/// Cell index of the (type, party) mean.
pub fn pair_index(kind: TweetType, party: Party) -> usize {
    kind.index() * Party::COUNT + party.index()
}

/// Cell index of the (type, party, theme) mean.
pub fn triple_index(kind: TweetType, party: Party, theme: Theme) -> usize {
    TweetType::COUNT * Party::COUNT
        + kind.index() * Party::COUNT * Theme::COUNT
        + party.index() * Theme::COUNT
        + theme.index()
}

/// Column names in canonical cell order: `s_<type>_<party>` then
/// `s_<type>_<party>_<theme>`.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_DIM);
    for kind in TweetType::ALL {
        for party in Party::ALL {
            names.push(format!("s_{}_{}", kind.name(), party.name()));
        }
    }
    for kind in TweetType::ALL {
        for party in Party::ALL {
            for theme in Theme::ALL {
                names.push(format!(
                    "s_{}_{}_{}",
                    kind.name(),
                    party.name(),
                    theme.name()
                ));
            }
        }
    }
    names
}

/// The 120 per-user average sentiments plus per-cell support counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub uid: UserId,
    pub values: Vec<f64>,
    pub support: Vec<u32>,
}

impl FeatureVector {
    pub fn neutral(uid: UserId) -> Self {
        FeatureVector {
            uid,
            values: vec![NEUTRAL_FILL; FEATURE_DIM],
            support: vec![0; FEATURE_DIM],
        }
    }

    pub fn pair(&self, kind: TweetType, party: Party) -> (f64, u32) {
        let i = pair_index(kind, party);
        (self.values[i], self.support[i])
    }

    pub fn triple(&self, kind: TweetType, party: Party, theme: Theme) -> (f64, u32) {
        let i = triple_index(kind, party, theme);
        (self.values[i], self.support[i])
    }
}

/// Mean sentiment and support for tweets of `uid` with type `kind` and the
/// exclusive party label `party`. Empty selection yields (0.5, 0).
pub fn sentiment_party(
    corpus: &Corpus,
    uid: &UserId,
    kind: TweetType,
    party: Party,
) -> (f64, usize) {
    let sentiments: Vec<f64> = corpus
        .tweets
        .values()
        .filter(|t| {
            &t.author_uid == uid && t.kind == kind && t.party_label == Some(party)
        })
        .filter_map(|t| t.sentiment)
        .collect();
    if sentiments.is_empty() {
        (NEUTRAL_FILL, 0)
    } else {
        (
            sentiments.iter().sum::<f64>() / sentiments.len() as f64,
            sentiments.len(),
        )
    }
}

/// As [`sentiment_party`] with the additional (non-exclusive) theme-hit
/// condition.
pub fn sentiment_party_theme(
    corpus: &Corpus,
    uid: &UserId,
    kind: TweetType,
    party: Party,
    theme: Theme,
) -> (f64, usize) {
    let sentiments: Vec<f64> = corpus
        .tweets
        .values()
        .filter(|t| {
            &t.author_uid == uid
                && t.kind == kind
                && t.party_label == Some(party)
                && t.hits_theme(theme)
        })
        .filter_map(|t| t.sentiment)
        .collect();
    if sentiments.is_empty() {
        (NEUTRAL_FILL, 0)
    } else {
        (
            sentiments.iter().sum::<f64>() / sentiments.len() as f64,
            sentiments.len(),
        )
    }
}

/// Assemble the full 120-cell vector for one user in a single pass over
/// their tweets.
pub fn build_feature_vector(corpus: &Corpus, uid: &UserId) -> FeatureVector {
    let tweets: Vec<&crate::corpus::Tweet> = corpus
        .tweets
        .values()
        .filter(|t| &t.author_uid == uid)
        .collect();
    build_from_tweets(uid.clone(), &tweets)
}

fn build_from_tweets(uid: UserId, tweets: &[&crate::corpus::Tweet]) -> FeatureVector {
    let mut sums = vec![0.0f64; FEATURE_DIM];
    let mut counts = vec![0u32; FEATURE_DIM];
    for tweet in tweets {
        let (party, sentiment) = match (tweet.party_label, tweet.sentiment) {
            (Some(p), Some(s)) => (p, s),
            _ => continue,
        };
        let pi = pair_index(tweet.kind, party);
        sums[pi] += sentiment;
        counts[pi] += 1;
        for theme in Theme::ALL {
            if tweet.hits_theme(theme) {
                let ti = triple_index(tweet.kind, party, theme);
                sums[ti] += sentiment;
                counts[ti] += 1;
            }
        }
    }
    let values = sums
        .iter()
        .zip(counts.iter())
        .map(|(s, c)| if *c == 0 { NEUTRAL_FILL } else { s / *c as f64 })
        .collect();
    FeatureVector {
        uid,
        values,
        support: counts,
    }
}

/// Which users to profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileWho {
    /// Gated bots.
    Bots,
    /// Users carrying a manual party label (the training sample).
    Labeled,
    /// Everyone.
    All,
}

/// Build feature vectors for the selected users, in deterministic uid order.
pub fn profile_users(corpus: &Corpus, who: ProfileWho) -> Vec<FeatureVector> {
    let by_author = corpus.tweets_by_author();
    let empty: Vec<&crate::corpus::Tweet> = Vec::new();
    let selected: Vec<&UserId> = corpus
        .users
        .values()
        .filter(|u| match who {
            ProfileWho::Bots => u.user_class == Some(UserClass::Bot),
            ProfileWho::Labeled => u.manual_party.is_some(),
            ProfileWho::All => true,
        })
        .map(|u| &u.uid)
        .collect();
    selected
        .par_iter()
        .map(|uid| build_from_tweets((*uid).clone(), by_author.get(*uid).unwrap_or(&empty)))
        .collect()
}

/// Bots that qualify for affinity classification: at least one tweet with a
/// single-party label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityReport {
    pub eligible: BTreeSet<UserId>,
    pub total_bots: usize,
}

impl EligibilityReport {
    pub fn eligible_count(&self) -> usize {
        self.eligible.len()
    }

    pub fn ratio(&self) -> f64 {
        if self.total_bots == 0 {
            0.0
        } else {
            self.eligible.len() as f64 / self.total_bots as f64
        }
    }
}

pub fn eligible_bots(corpus: &Corpus) -> EligibilityReport {
    let bots: BTreeSet<&UserId> = corpus
        .users
        .values()
        .filter(|u| u.user_class == Some(UserClass::Bot))
        .map(|u| &u.uid)
        .collect();
    let mut eligible = BTreeSet::new();
    for tweet in corpus.tweets.values() {
        if tweet.party_label.is_some() && bots.contains(&tweet.author_uid) {
            eligible.insert(tweet.author_uid.clone());
        }
    }
    EligibilityReport {
        eligible,
        total_bots: bots.len(),
    }
}

/// Write vectors as CSV: `uid`, 120 named mean columns, then the 120
/// matching `n_` support columns.
pub fn export_features(path: &Path, vectors: &[FeatureVector]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let names = feature_names();
    let mut header = vec!["uid".to_owned()];
    header.extend(names.iter().cloned());
    header.extend(names.iter().map(|n| format!("n_{}", &n[2..])));
    writeln!(out, "{}", header.join(","))?;
    for v in vectors {
        let mut row = Vec::with_capacity(1 + 2 * FEATURE_DIM);
        row.push(v.uid.to_string());
        row.extend(v.values.iter().map(|x| format!("{x}")));
        row.extend(v.support.iter().map(|c| c.to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Read a feature CSV produced by [`export_features`].
pub fn load_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open feature file {}: {e}", path.display())))?;
    let expected_cols = 1 + 2 * FEATURE_DIM;
    let mut vectors = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != expected_cols {
            return Err(Error::data(format!(
                "feature row has {} columns, expected {expected_cols}",
                record.len()
            )));
        }
        let uid = UserId::new(record[0].to_owned());
        let mut values = Vec::with_capacity(FEATURE_DIM);
        let mut support = Vec::with_capacity(FEATURE_DIM);
        for i in 0..FEATURE_DIM {
            values.push(record[1 + i].parse::<f64>().map_err(|e| {
                Error::data(format!("bad feature value {:?}: {e}", &record[1 + i]))
            })?);
        }
        for i in 0..FEATURE_DIM {
            support.push(record[1 + FEATURE_DIM + i].parse::<u32>().map_err(|e| {
                Error::data(format!(
                    "bad support value {:?}: {e}",
                    &record[1 + FEATURE_DIM + i]
                ))
            })?);
        }
        vectors.push(FeatureVector {
            uid,
            values,
            support,
        });
    }
    Ok(vectors)
}

/// uid → manual party label map, for assembling training sets.
pub fn manual_labels(corpus: &Corpus) -> BTreeMap<UserId, Party> {
    corpus
        .users
        .values()
        .filter_map(|u| u.manual_party.map(|p| (u.uid.clone(), p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TimeWindow, Tweet};
    use crate::types::TweetId;
    use std::collections::BTreeMap as Map;

    fn augmented_tweet(
        tid: &str,
        author: &str,
        kind: TweetType,
        sentiment: f64,
        party: Option<Party>,
        themes: &[Theme],
    ) -> Tweet {
        let mut hits = [false; Theme::COUNT];
        for t in themes {
            hits[t.index()] = true;
        }
        Tweet {
            tid: TweetId::new(tid),
            kind,
            timestamp: 10,
            author_uid: UserId::new(author),
            ref_tid: (kind != TweetType::Original).then(|| TweetId::new("x")),
            text: String::new(),
            sentiment: Some(sentiment),
            theme_hits: hits,
            party_label: party,
            ref_resolved: None,
            extra: Map::new(),
        }
    }

    #[test]
    fn feature_dim_is_120_and_indices_cover_it() {
        assert_eq!(FEATURE_DIM, 120);
        let mut seen = vec![false; FEATURE_DIM];
        for kind in TweetType::ALL {
            for party in Party::ALL {
                seen[pair_index(kind, party)] = true;
                for theme in Theme::ALL {
                    seen[triple_index(kind, party, theme)] = true;
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
        assert_eq!(feature_names().len(), FEATURE_DIM);
        assert_eq!(feature_names()[0], "s_original_UP");
        assert_eq!(feature_names()[20], "s_original_UP_AbascalEH");
    }

    #[test]
    fn sentiment_party_means_and_imputation() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet("t1", "u", TweetType::Retweet, 0.2, Some(Party::VOX), &[]));
        c.insert_tweet(augmented_tweet("t2", "u", TweetType::Retweet, 0.4, Some(Party::VOX), &[]));
        let uid = UserId::new("u");
        let (mean, n) = sentiment_party(&c, &uid, TweetType::Retweet, Party::VOX);
        assert!((mean - 0.3).abs() < 1e-12);
        assert_eq!(n, 2);
        assert_eq!(
            sentiment_party(&c, &uid, TweetType::Reply, Party::CS),
            (0.5, 0)
        );
    }

    #[test]
    fn multi_party_tweets_count_nowhere() {
        // a tweet citing two parties has no label, so it contributes to no
        // party's mean
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet("t1", "u", TweetType::Original, 0.9, None, &[]));
        let uid = UserId::new("u");
        for party in Party::ALL {
            assert_eq!(
                sentiment_party(&c, &uid, TweetType::Original, party),
                (0.5, 0)
            );
        }
    }

    #[test]
    fn theme_condition_filters_and_multi_theme_counts_twice() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet(
            "t1",
            "u",
            TweetType::Original,
            0.6,
            Some(Party::PP),
            &[Theme::Debate, Theme::Election],
        ));
        let uid = UserId::new("u");
        assert_eq!(
            sentiment_party_theme(&c, &uid, TweetType::Original, Party::PP, Theme::Debate),
            (0.6, 1)
        );
        assert_eq!(
            sentiment_party_theme(&c, &uid, TweetType::Original, Party::PP, Theme::Election),
            (0.6, 1)
        );
        assert_eq!(
            sentiment_party_theme(&c, &uid, TweetType::Original, Party::PP, Theme::Catalonia),
            (0.5, 0)
        );
    }

    #[test]
    fn vector_of_user_without_labels_is_all_neutral() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet("t1", "u", TweetType::Original, 0.9, None, &[]));
        let v = build_feature_vector(&c, &UserId::new("u"));
        assert!(v.values.iter().all(|x| *x == 0.5));
        assert!(v.support.iter().all(|s| *s == 0));
    }

    #[test]
    fn single_labeled_tweet_populates_exactly_one_cell() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet(
            "t1",
            "u",
            TweetType::Original,
            0.9,
            Some(Party::PSOE),
            &[],
        ));
        let v = build_feature_vector(&c, &UserId::new("u"));
        assert_eq!(v.pair(TweetType::Original, Party::PSOE), (0.9, 1));
        for theme in Theme::ALL {
            assert_eq!(v.triple(TweetType::Original, Party::PSOE, theme), (0.5, 0));
        }
        let populated = v.support.iter().filter(|s| **s > 0).count();
        assert_eq!(populated, 1);
    }

    #[test]
    fn vector_agrees_with_per_cell_ops() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        let data = [
            ("t1", TweetType::Original, 0.9, Some(Party::PSOE), vec![Theme::Debate]),
            ("t2", TweetType::Retweet, 0.2, Some(Party::VOX), vec![]),
            ("t3", TweetType::Retweet, 0.4, Some(Party::VOX), vec![Theme::Election]),
            ("t4", TweetType::Quote, 0.7, None, vec![Theme::Debate]),
        ];
        for (tid, kind, s, p, themes) in data {
            c.insert_tweet(augmented_tweet(tid, "u", kind, s, p, &themes));
        }
        let uid = UserId::new("u");
        let v = build_feature_vector(&c, &uid);
        for kind in TweetType::ALL {
            for party in Party::ALL {
                let (m, n) = sentiment_party(&c, &uid, kind, party);
                let (vm, vn) = v.pair(kind, party);
                assert_eq!(vm, m);
                assert_eq!(vn as usize, n);
                for theme in Theme::ALL {
                    let (m, n) = sentiment_party_theme(&c, &uid, kind, party, theme);
                    let (vm, vn) = v.triple(kind, party, theme);
                    assert_eq!(vm, m);
                    assert_eq!(vn as usize, n);
                }
            }
        }
    }

    #[test]
    fn identical_tweet_multisets_give_identical_vectors() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        for (uid, tid) in [("a", "t1"), ("b", "t2")] {
            c.insert_tweet(augmented_tweet(
                tid,
                uid,
                TweetType::Reply,
                0.3,
                Some(Party::CS),
                &[Theme::Catalonia],
            ));
        }
        let va = build_feature_vector(&c, &UserId::new("a"));
        let vb = build_feature_vector(&c, &UserId::new("b"));
        assert_eq!(va.values, vb.values);
        assert_eq!(va.support, vb.support);
    }

    #[test]
    fn eligibility_requires_party_labeled_tweet() {
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(augmented_tweet("t1", "bot1", TweetType::Original, 0.5, None, &[]));
        c.insert_tweet(augmented_tweet(
            "t2",
            "bot2",
            TweetType::Original,
            0.5,
            Some(Party::PP),
            &[],
        ));
        for uid in ["bot1", "bot2"] {
            c.users.get_mut(&UserId::new(uid)).unwrap().user_class = Some(UserClass::Bot);
        }
        let report = eligible_bots(&c);
        assert_eq!(report.total_bots, 2);
        assert_eq!(report.eligible_count(), 1);
        assert!(report.eligible.contains(&UserId::new("bot2")));

        let empty = eligible_bots(&Corpus::new(TimeWindow::new(0, 1).unwrap()));
        assert_eq!(empty.total_bots, 0);
        assert_eq!(empty.eligible_count(), 0);
    }

    #[test]
    fn feature_csv_roundtrip() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("features.csv");
        let mut v = FeatureVector::neutral(UserId::new("u1"));
        v.values[0] = 0.25;
        v.support[0] = 3;
        export_features(&path, &[v.clone()]).unwrap();
        let loaded = load_features(&path).unwrap();
        assert_eq!(loaded, vec![v]);
    }
}
