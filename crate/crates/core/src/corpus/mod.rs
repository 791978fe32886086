//! The tweet and user collections: loading, window filtering, reference
//! resolution, unusable-user removal and anonymization.
//!
//! A [`Corpus`] is immutable in spirit: the pipeline builds it once per stage
//! and only ever adds annotations (augmentations, classes, resolution flags).
//! All maps are ordered so that serialization and iteration are
//! deterministic.

mod anonymize;
mod ingest;

pub use anonymize::{anonymize, AnonymizeMode};
pub use ingest::{
    ingest_tweets, load_corpus, load_user_sidecar, save_corpus, IngestReport, SidecarReport,
};

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Party, Theme, TweetId, TweetType, UserClass, UserId};

/// Inclusive observation window in UTC seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::config(format!(
                "window start {start} is after end {end}"
            )));
        }
        Ok(TimeWindow { start, end })
    }

    /// Window from calendar dates: start-of-day through end-of-day, UTC.
    pub fn from_dates(start: &str, end: &str) -> Result<Self> {
        let s = parse_date(start)?.and_hms_opt(0, 0, 0).unwrap().and_utc();
        let e = parse_date(end)?.and_hms_opt(23, 59, 59).unwrap().and_utc();
        TimeWindow::new(s.timestamp(), e.timestamp())
    }

    /// The default observation window: 2019-10-04 through 2019-11-11.
    pub fn default_observation() -> Self {
        TimeWindow::from_dates("2019-10-04", "2019-11-11").expect("static dates parse")
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts <= self.end
    }
}

fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::config(format!("bad date {s:?}: {e}")))
}

/// Parse a timestamp given as RFC 3339, naive `YYYY-MM-DDTHH:MM:SS` (assumed
/// UTC) or a plain calendar date (midnight UTC).
pub fn parse_timestamp(s: &str) -> Result<i64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Ok(dt.and_utc().timestamp());
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp());
    }
    Err(Error::data(format!("unparseable timestamp {s:?}")))
}

/// One collected interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub tid: TweetId,
    #[serde(rename = "type")]
    pub kind: TweetType,
    /// UTC seconds.
    pub timestamp: i64,
    pub author_uid: UserId,
    /// Referenced tweet, present iff `kind != Original`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_tid: Option<TweetId>,
    pub text: String,
    /// Valence in `[0, 1]`, 0.5 neutral. Filled by the augment stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
    /// Per-theme keyword hit, in canonical Γ order.
    #[serde(default, skip_serializing_if = "no_theme_hits")]
    pub theme_hits: [bool; Theme::COUNT],
    /// Exclusive one-hot party label; `None` when zero or several parties
    /// match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party_label: Option<Party>,
    /// Whether `ref_tid` resolves within the corpus. `None` until
    /// [`resolve_references`] runs; always `None` for originals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_resolved: Option<bool>,
    /// Pass-through record fields with no semantics here (favorite counts,
    /// user statuses and the like survive round-trips untouched).
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

fn no_theme_hits(hits: &[bool; Theme::COUNT]) -> bool {
    hits.iter().all(|h| !h)
}

impl Tweet {
    pub fn hits_theme(&self, theme: Theme) -> bool {
        self.theme_hits[theme.index()]
    }
}

/// One account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub uid: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_score: Option<f64>,
    /// Gate outcome; `None` until the user has been gated or removed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_class: Option<UserClass>,
    /// Followers already intersected with the corpus user set.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub followers: BTreeSet<UserId>,
    /// Followings already intersected with the corpus user set.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub followings: BTreeSet<UserId>,
    /// Manually assigned training label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_party: Option<Party>,
}

impl User {
    pub fn new(uid: UserId) -> Self {
        User {
            uid,
            bot_score: None,
            user_class: None,
            followers: BTreeSet::new(),
            followings: BTreeSet::new(),
            manual_party: None,
        }
    }

    pub fn is_removed(&self) -> bool {
        self.user_class == Some(UserClass::Removed)
    }
}

/// The tweet and user collections plus the observation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub window: TimeWindow,
    pub tweets: BTreeMap<TweetId, Tweet>,
    pub users: BTreeMap<UserId, User>,
}

impl Corpus {
    pub fn new(window: TimeWindow) -> Self {
        Corpus {
            window,
            tweets: BTreeMap::new(),
            users: BTreeMap::new(),
        }
    }

    /// Insert a tweet, creating its author if missing. Intended for builders
    /// and the synthetic generator; the ingest path validates more.
    pub fn insert_tweet(&mut self, tweet: Tweet) {
        self.users
            .entry(tweet.author_uid.clone())
            .or_insert_with(|| User::new(tweet.author_uid.clone()));
        self.tweets.insert(tweet.tid.clone(), tweet);
    }

    pub fn insert_user(&mut self, user: User) {
        self.users.insert(user.uid.clone(), user);
    }

    /// Number of tweets authored by each user (users with none are absent).
    pub fn authored_counts(&self) -> BTreeMap<&UserId, usize> {
        let mut counts: BTreeMap<&UserId, usize> = BTreeMap::new();
        for t in self.tweets.values() {
            *counts.entry(&t.author_uid).or_insert(0) += 1;
        }
        counts
    }

    /// Tweet ids grouped by author, in deterministic order.
    pub fn tweets_by_author(&self) -> BTreeMap<&UserId, Vec<&Tweet>> {
        let mut by_author: BTreeMap<&UserId, Vec<&Tweet>> = BTreeMap::new();
        for t in self.tweets.values() {
            by_author.entry(&t.author_uid).or_default().push(t);
        }
        by_author
    }

    /// Drop follower/following entries that do not correspond to a corpus
    /// user. Runs automatically at the end of ingestion.
    pub fn intersect_relations(&mut self) {
        let known: BTreeSet<UserId> = self.users.keys().cloned().collect();
        for user in self.users.values_mut() {
            user.followers.retain(|u| known.contains(u));
            user.followings.retain(|u| known.contains(u));
        }
    }
}

/// Outcome of [`resolve_references`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefReport {
    pub resolved: usize,
    pub dangling: Vec<(TweetId, TweetId)>,
}

impl RefReport {
    pub fn dangling_count(&self) -> usize {
        self.dangling.len()
    }
}

/// Mark every reference as resolvable or dangling. Report-only: the corpus
/// keeps dangling tweets, and downstream sentiment inheritance falls back to
/// the tweet's own text.
pub fn resolve_references(corpus: &mut Corpus) -> RefReport {
    let known: BTreeSet<TweetId> = corpus.tweets.keys().cloned().collect();
    let mut report = RefReport::default();
    for tweet in corpus.tweets.values_mut() {
        match &tweet.ref_tid {
            Some(ref_tid) => {
                let ok = known.contains(ref_tid);
                tweet.ref_resolved = Some(ok);
                if ok {
                    report.resolved += 1;
                } else {
                    report.dangling.push((tweet.tid.clone(), ref_tid.clone()));
                }
            }
            None => tweet.ref_resolved = None,
        }
    }
    report
}

/// Outcome of [`remove_unusable_users`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoveReport {
    pub removed_listed: usize,
    pub removed_no_tweets: usize,
    pub unknown_ids: usize,
}

impl RemoveReport {
    pub fn total_removed(&self) -> usize {
        self.removed_listed + self.removed_no_tweets
    }
}

/// Flag unusable accounts as removed: every id on the external list plus
/// every user that authored no tweets. Removed users are excluded from all
/// downstream gating and profiling.
pub fn remove_unusable_users(corpus: &mut Corpus, removed_ids: &BTreeSet<UserId>) -> RemoveReport {
    let mut report = RemoveReport::default();
    report.unknown_ids = removed_ids
        .iter()
        .filter(|id| !corpus.users.contains_key(*id))
        .count();

    let authored = corpus.authored_counts();
    let no_tweets: BTreeSet<UserId> = corpus
        .users
        .keys()
        .filter(|uid| !authored.contains_key(*uid))
        .cloned()
        .collect();

    for (uid, user) in corpus.users.iter_mut() {
        if user.is_removed() {
            continue;
        }
        if removed_ids.contains(uid) {
            user.user_class = Some(UserClass::Removed);
            report.removed_listed += 1;
        } else if no_tweets.contains(uid) {
            user.user_class = Some(UserClass::Removed);
            report.removed_no_tweets += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tweet(tid: &str, kind: TweetType, ts: i64, author: &str, gref: Option<&str>) -> Tweet {
        Tweet {
            tid: TweetId::new(tid),
            kind,
            timestamp: ts,
            author_uid: UserId::new(author),
            ref_tid: gref.map(TweetId::new),
            text: format!("text of {tid}"),
            sentiment: None,
            theme_hits: [false; Theme::COUNT],
            party_label: None,
            ref_resolved: None,
            extra: BTreeMap::new(),
        }
    }

    fn sample_corpus() -> Corpus {
        let mut c = Corpus::new(TimeWindow::new(0, 1000).unwrap());
        c.insert_tweet(tweet("t1", TweetType::Original, 10, "alice", None));
        c.insert_tweet(tweet("t2", TweetType::Retweet, 20, "bob", Some("t1")));
        c.insert_tweet(tweet("t3", TweetType::Reply, 30, "alice", Some("gone")));
        c
    }

    #[test]
    fn window_is_inclusive() {
        let w = TimeWindow::from_dates("2019-10-04", "2019-11-11").unwrap();
        assert!(w.contains(w.start));
        assert!(w.contains(w.end));
        assert!(!w.contains(w.start - 1));
        assert!(!w.contains(w.end + 1));
    }

    #[test]
    fn parse_timestamp_formats() {
        assert_eq!(parse_timestamp("1970-01-01T00:00:00Z").unwrap(), 0);
        assert_eq!(parse_timestamp("1970-01-01T00:00:01").unwrap(), 1);
        assert_eq!(parse_timestamp("1970-01-02").unwrap(), 86400);
        assert!(parse_timestamp("not a date").is_err());
    }

    #[test]
    fn resolve_marks_resolved_and_dangling() {
        let mut c = sample_corpus();
        let report = resolve_references(&mut c);
        assert_eq!(report.resolved, 1);
        assert_eq!(report.dangling_count(), 1);
        assert_eq!(
            report.dangling[0],
            (TweetId::new("t3"), TweetId::new("gone"))
        );
        assert_eq!(c.tweets[&TweetId::new("t1")].ref_resolved, None);
        assert_eq!(c.tweets[&TweetId::new("t2")].ref_resolved, Some(true));
        assert_eq!(c.tweets[&TweetId::new("t3")].ref_resolved, Some(false));
    }

    #[test]
    fn resolve_chain_quote_retweet_original() {
        // Walked by an independent reference-chasing check: follow each ref
        // until an original; every hop must be marked resolved.
        let mut c = Corpus::new(TimeWindow::new(0, 100).unwrap());
        c.insert_tweet(tweet("a", TweetType::Original, 1, "u1", None));
        c.insert_tweet(tweet("b", TweetType::Retweet, 2, "u2", Some("a")));
        c.insert_tweet(tweet("c", TweetType::Quote, 3, "u3", Some("b")));
        let report = resolve_references(&mut c);
        assert_eq!(report.resolved, 2);
        assert!(report.dangling.is_empty());

        let mut cur = TweetId::new("c");
        let mut hops = 0;
        while let Some(next) = c.tweets[&cur].ref_tid.clone() {
            assert_eq!(c.tweets[&cur].ref_resolved, Some(true));
            cur = next;
            hops += 1;
        }
        assert_eq!(hops, 2);
        assert_eq!(cur, TweetId::new("a"));
    }

    #[test]
    fn remove_flags_listed_and_tweetless() {
        let mut c = sample_corpus();
        c.insert_user(User::new(UserId::new("lurker")));
        let listed: BTreeSet<UserId> =
            [UserId::new("bob"), UserId::new("nobody")].into_iter().collect();
        let report = remove_unusable_users(&mut c, &listed);
        assert_eq!(report.removed_listed, 1);
        assert_eq!(report.removed_no_tweets, 1);
        assert_eq!(report.unknown_ids, 1);
        assert!(c.users[&UserId::new("bob")].is_removed());
        assert!(c.users[&UserId::new("lurker")].is_removed());
        assert!(!c.users[&UserId::new("alice")].is_removed());
    }

    #[test]
    fn remove_identity_on_active_corpus() {
        let mut c = sample_corpus();
        let before = c.clone();
        let report = remove_unusable_users(&mut c, &BTreeSet::new());
        assert_eq!(report.total_removed(), 0);
        assert_eq!(c, before);
    }

    #[test]
    fn intersect_drops_foreign_relations() {
        let mut c = sample_corpus();
        let mut u = User::new(UserId::new("carol"));
        u.followers.insert(UserId::new("alice"));
        u.followers.insert(UserId::new("stranger"));
        u.followings.insert(UserId::new("bob"));
        c.insert_user(u);
        c.intersect_relations();
        let carol = &c.users[&UserId::new("carol")];
        assert!(carol.followers.contains(&UserId::new("alice")));
        assert!(!carol.followers.contains(&UserId::new("stranger")));
        assert!(carol.followings.contains(&UserId::new("bob")));
    }
}
