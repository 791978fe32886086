//! Line-delimited ingestion and the on-disk corpus directory format.
//!
//! Input tweets are one JSON object per line with fields `tid`, `type`,
//! `timestamp` (ISO-8601 or epoch seconds), `author_uid`, optional `ref_tid`
//! and `text`; unknown fields are kept as pass-through. The user sidecar is
//! one JSON object per line with `uid` and optional `bot_score`,
//! `followers`, `followings`, `manual_party`.
//!
//! A saved corpus directory holds `tweets.jsonl`, `users.jsonl` and
//! `meta.json`; re-ingesting a saved corpus reproduces it exactly.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, TimeWindow, Tweet, User};
use crate::error::{Error, Result};
use crate::types::{Party, Theme, TweetId, TweetType, UserClass, UserId};

/// Per-line ingestion outcome counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub ingested: usize,
    pub out_of_window: usize,
    pub malformed: usize,
    pub duplicates: usize,
}

/// Sidecar merge counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarReport {
    pub merged: usize,
    pub added: usize,
    pub rejected: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TimestampField {
    Epoch(i64),
    Text(String),
}

impl TimestampField {
    fn to_utc_seconds(&self) -> Result<i64> {
        match self {
            TimestampField::Epoch(ts) => Ok(*ts),
            TimestampField::Text(s) => super::parse_timestamp(s),
        }
    }
}

#[derive(Deserialize)]
struct RawTweet {
    tid: String,
    #[serde(rename = "type")]
    kind: TweetType,
    timestamp: TimestampField,
    author_uid: String,
    #[serde(default)]
    ref_tid: Option<String>,
    #[serde(default)]
    text: String,
    #[serde(default)]
    sentiment: Option<f64>,
    #[serde(default)]
    theme_hits: Option<[bool; Theme::COUNT]>,
    #[serde(default)]
    party_label: Option<Party>,
    #[serde(default)]
    ref_resolved: Option<bool>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

impl RawTweet {
    fn into_tweet(self) -> Result<Tweet> {
        let timestamp = self.timestamp.to_utc_seconds()?;
        let has_ref = self.ref_tid.is_some();
        if (self.kind == TweetType::Original) == has_ref {
            return Err(Error::data(format!(
                "tweet {}: type {} {} a reference",
                self.tid,
                self.kind,
                if has_ref { "must not carry" } else { "requires" },
            )));
        }
        if let Some(s) = self.sentiment {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::data(format!(
                    "tweet {}: sentiment {s} outside [0, 1]",
                    self.tid
                )));
            }
        }
        Ok(Tweet {
            tid: TweetId::new(self.tid),
            kind: self.kind,
            timestamp,
            author_uid: UserId::new(self.author_uid),
            ref_tid: self.ref_tid.map(TweetId::new),
            text: self.text,
            sentiment: self.sentiment,
            theme_hits: self.theme_hits.unwrap_or([false; Theme::COUNT]),
            party_label: self.party_label,
            ref_resolved: self.ref_resolved,
            extra: self.extra,
        })
    }
}

/// Ingest a line-delimited tweet file, keeping parse-valid tweets inside the
/// window. Users are derived from tweet authors; malformed lines are skipped
/// and counted, out-of-window tweets excluded and counted.
pub fn ingest_tweets(path: &Path, window: TimeWindow) -> Result<(Corpus, IngestReport)> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open tweet file {}: {e}", path.display())))?;
    let mut corpus = Corpus::new(window);
    let mut report = IngestReport::default();

    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet = match serde_json::from_str::<RawTweet>(&line).map_err(Error::from) {
            Ok(raw) => match raw.into_tweet() {
                Ok(t) => t,
                Err(e) => {
                    log::debug!("skipping malformed tweet line: {e}");
                    report.malformed += 1;
                    continue;
                }
            },
            Err(e) => {
                log::debug!("skipping unparseable tweet line: {e}");
                report.malformed += 1;
                continue;
            }
        };
        if !window.contains(tweet.timestamp) {
            report.out_of_window += 1;
            continue;
        }
        if corpus.tweets.contains_key(&tweet.tid) {
            report.duplicates += 1;
            continue;
        }
        corpus.insert_tweet(tweet);
        report.ingested += 1;
    }
    corpus.intersect_relations();
    Ok((corpus, report))
}

#[derive(Deserialize)]
struct RawUser {
    uid: String,
    #[serde(default)]
    bot_score: Option<f64>,
    #[serde(default)]
    user_class: Option<UserClass>,
    #[serde(default)]
    followers: Vec<String>,
    #[serde(default)]
    followings: Vec<String>,
    #[serde(default)]
    manual_party: Option<Party>,
}

/// Merge a user sidecar file into the corpus. Scores outside `[0, 1]` reject
/// the record; users unknown to the corpus are added (and will be flagged
/// removed later if they authored nothing). Re-intersects relation sets.
pub fn load_user_sidecar(corpus: &mut Corpus, path: &Path) -> Result<SidecarReport> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open user file {}: {e}", path.display())))?;
    let mut report = SidecarReport::default();

    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawUser = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                log::debug!("skipping unparseable user line: {e}");
                report.rejected += 1;
                continue;
            }
        };
        if let Some(score) = raw.bot_score {
            if !(0.0..=1.0).contains(&score) {
                log::debug!("rejecting user {}: bot score {score} outside [0, 1]", raw.uid);
                report.rejected += 1;
                continue;
            }
        }
        let uid = UserId::new(raw.uid);
        let existed = corpus.users.contains_key(&uid);
        let user = corpus
            .users
            .entry(uid.clone())
            .or_insert_with(|| User::new(uid));
        user.bot_score = raw.bot_score;
        user.user_class = raw.user_class;
        user.followers = raw.followers.into_iter().map(UserId::new).collect();
        user.followings = raw.followings.into_iter().map(UserId::new).collect();
        user.manual_party = raw.manual_party;
        if existed {
            report.merged += 1;
        } else {
            report.added += 1;
        }
    }
    corpus.intersect_relations();
    Ok(report)
}

#[derive(Serialize, Deserialize)]
struct CorpusMeta {
    format_version: u32,
    window: TimeWindow,
    tweet_count: usize,
    user_count: usize,
}

const CORPUS_FORMAT_VERSION: u32 = 1;

/// Write a corpus directory: `tweets.jsonl`, `users.jsonl`, `meta.json`.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut tw = BufWriter::new(File::create(dir.join("tweets.jsonl"))?);
    for tweet in corpus.tweets.values() {
        serde_json::to_writer(&mut tw, tweet)?;
        tw.write_all(b"\n")?;
    }
    tw.flush()?;

    let mut uw = BufWriter::new(File::create(dir.join("users.jsonl"))?);
    for user in corpus.users.values() {
        serde_json::to_writer(&mut uw, user)?;
        uw.write_all(b"\n")?;
    }
    uw.flush()?;

    let meta = CorpusMeta {
        format_version: CORPUS_FORMAT_VERSION,
        window: corpus.window,
        tweet_count: corpus.tweets.len(),
        user_count: corpus.users.len(),
    };
    fs::write(dir.join("meta.json"), serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

/// Load a saved corpus directory. Strict: malformed lines are errors here,
/// unlike raw ingestion.
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let meta: CorpusMeta = serde_json::from_slice(&fs::read(dir.join("meta.json")).map_err(
        |e| Error::data(format!("cannot read corpus meta in {}: {e}", dir.display())),
    )?)?;
    if meta.format_version != CORPUS_FORMAT_VERSION {
        return Err(Error::data(format!(
            "unsupported corpus format version {}",
            meta.format_version
        )));
    }

    let (mut corpus, report) = ingest_tweets(&dir.join("tweets.jsonl"), meta.window)?;
    if report.malformed > 0 || report.out_of_window > 0 || report.duplicates > 0 {
        return Err(Error::data(format!(
            "saved corpus in {} is inconsistent: {report:?}",
            dir.display()
        )));
    }
    load_user_sidecar(&mut corpus, &dir.join("users.jsonl"))?;
    if corpus.tweets.len() != meta.tweet_count || corpus.users.len() != meta.user_count {
        return Err(Error::data(format!(
            "saved corpus in {} does not match its meta counts",
            dir.display()
        )));
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write_lines(dir: &Path, name: &str, lines: &[&str]) -> std::path::PathBuf {
        let path = dir.join(name);
        fs::write(&path, lines.join("\n")).unwrap();
        path
    }

    #[test]
    fn ingest_filters_window_and_counts_skips() {
        let dir = TempDir::new().unwrap();
        let path = write_lines(
            dir.path(),
            "tweets.jsonl",
            &[
                r#"{"tid":"t1","type":"original","timestamp":100,"author_uid":"a","text":"hola"}"#,
                r#"{"tid":"t2","type":"original","timestamp":200,"author_uid":"b","text":"adios"}"#,
                r#"{"tid":"t3","type":"reply","timestamp":300,"author_uid":"a","ref_tid":"t1","text":"re"}"#,
                r#"{"tid":"t4","type":"original","timestamp":9999,"author_uid":"c","text":"late"}"#,
            ],
        );
        let (corpus, report) =
            ingest_tweets(&path, TimeWindow::new(0, 1000).unwrap()).unwrap();
        assert_eq!(report.ingested, 3);
        assert_eq!(report.out_of_window, 1);
        assert_eq!(report.malformed, 0);
        assert_eq!(corpus.tweets.len(), 3);
        // users derived from in-window authors only
        assert_eq!(corpus.users.len(), 2);
    }

    #[test]
    fn ingest_empty_file_gives_empty_corpus() {
        let dir = TempDir::new().unwrap();
        let path = write_lines(dir.path(), "tweets.jsonl", &[]);
        let (corpus, report) =
            ingest_tweets(&path, TimeWindow::new(0, 1000).unwrap()).unwrap();
        assert!(corpus.tweets.is_empty());
        assert!(corpus.users.is_empty());
        assert_eq!(report.ingested, 0);
    }

    #[test]
    fn ingest_skips_malformed_lines() {
        let dir = TempDir::new().unwrap();
        let path = write_lines(
            dir.path(),
            "tweets.jsonl",
            &[
                "not json at all",
                // original with a ref: type/ref inconsistency
                r#"{"tid":"x","type":"original","timestamp":1,"author_uid":"a","ref_tid":"y","text":""}"#,
                // retweet without a ref
                r#"{"tid":"y","type":"retweet","timestamp":1,"author_uid":"a","text":""}"#,
                // sentiment out of range
                r#"{"tid":"z","type":"original","timestamp":1,"author_uid":"a","text":"","sentiment":1.5}"#,
                // bad timestamp
                r#"{"tid":"w","type":"original","timestamp":"soonish","author_uid":"a","text":""}"#,
                r#"{"tid":"ok","type":"original","timestamp":1,"author_uid":"a","text":"fine"}"#,
            ],
        );
        let (corpus, report) =
            ingest_tweets(&path, TimeWindow::new(0, 10).unwrap()).unwrap();
        assert_eq!(report.malformed, 5);
        assert_eq!(report.ingested, 1);
        assert_eq!(corpus.tweets.len(), 1);
    }

    #[test]
    fn ingest_accepts_iso_timestamps_and_extras() {
        let dir = TempDir::new().unwrap();
        let path = write_lines(
            dir.path(),
            "tweets.jsonl",
            &[
                r#"{"tid":"t1","type":"original","timestamp":"1970-01-01T00:01:40Z","author_uid":"a","text":"x","favs":7}"#,
            ],
        );
        let (corpus, _) = ingest_tweets(&path, TimeWindow::new(0, 1000).unwrap()).unwrap();
        let t = &corpus.tweets[&TweetId::new("t1")];
        assert_eq!(t.timestamp, 100);
        assert_eq!(t.extra["favs"], serde_json::json!(7));
    }

    #[test]
    fn retweet_of_in_window_original_is_resolvable() {
        let dir = TempDir::new().unwrap();
        let path = write_lines(
            dir.path(),
            "tweets.jsonl",
            &[
                r#"{"tid":"o","type":"original","timestamp":10,"author_uid":"a","text":"orig"}"#,
                r#"{"tid":"r","type":"retweet","timestamp":20,"author_uid":"b","ref_tid":"o","text":"rt orig"}"#,
            ],
        );
        let (mut corpus, report) =
            ingest_tweets(&path, TimeWindow::new(0, 100).unwrap()).unwrap();
        assert_eq!(report.ingested, 2);
        let refs = super::super::resolve_references(&mut corpus);
        assert_eq!(refs.resolved, 1);
        assert_eq!(refs.dangling_count(), 0);
    }

    #[test]
    fn sidecar_merges_scores_and_relations() {
        let dir = TempDir::new().unwrap();
        let tweets = write_lines(
            dir.path(),
            "tweets.jsonl",
            &[r#"{"tid":"t1","type":"original","timestamp":1,"author_uid":"a","text":"x"}"#],
        );
        let users = write_lines(
            dir.path(),
            "users.jsonl",
            &[
                r#"{"uid":"a","bot_score":0.4,"followers":["b","ghost"],"manual_party":"PSOE"}"#,
                r#"{"uid":"b","bot_score":0.2,"followings":["a"]}"#,
                r#"{"uid":"bad","bot_score":1.3}"#,
            ],
        );
        let (mut corpus, _) = ingest_tweets(&tweets, TimeWindow::new(0, 10).unwrap()).unwrap();
        let report = load_user_sidecar(&mut corpus, &users).unwrap();
        assert_eq!(report.merged, 1);
        assert_eq!(report.added, 1);
        assert_eq!(report.rejected, 1);
        let a = &corpus.users[&UserId::new("a")];
        assert_eq!(a.bot_score, Some(0.4));
        assert_eq!(a.manual_party, Some(Party::PSOE));
        // "ghost" is not a corpus user, so the intersection drops it
        assert_eq!(a.followers.len(), 1);
    }

    #[test]
    fn save_load_roundtrip_preserves_corpus() {
        let dir = TempDir::new().unwrap();
        let tweets = write_lines(
            dir.path(),
            "in.jsonl",
            &[
                r#"{"tid":"t1","type":"original","timestamp":10,"author_uid":"a","text":"hola","favs":3}"#,
                r#"{"tid":"t2","type":"retweet","timestamp":20,"author_uid":"b","ref_tid":"t1","text":"rt hola"}"#,
            ],
        );
        let (mut corpus, _) = ingest_tweets(&tweets, TimeWindow::new(0, 100).unwrap()).unwrap();
        super::super::resolve_references(&mut corpus);
        corpus.users.get_mut(&UserId::new("a")).unwrap().bot_score = Some(0.9);

        let out = dir.path().join("corpus");
        save_corpus(&corpus, &out).unwrap();
        let loaded = load_corpus(&out).unwrap();
        assert_eq!(corpus, loaded);

        // and again: re-serializing the loaded corpus changes nothing
        let out2 = dir.path().join("corpus2");
        save_corpus(&loaded, &out2).unwrap();
        let loaded2 = load_corpus(&out2).unwrap();
        assert_eq!(loaded, loaded2);
    }
}
