//! Text augmentation: normalization, deterministic lexicon sentiment, theme
//! bags and the exclusive one-hot party label.
//!
//! Party bags match exclusively: a tweet is labeled `P` only when at least
//! one of `P`'s keywords matches and no keyword of any other party does.
//! Theme bags are inclusive — a tweet may hit several themes. Matching is
//! case-folded substring containment over normalized text, and retweets are
//! matched (and scored) against the referenced tweet's text when the
//! reference resolves.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{resolve_references, Corpus};
use crate::error::{Error, Result};
use crate::types::{Party, Theme, TweetId, TweetType};

/// Token-valence table plus an emoji-to-text map.
///
/// Valences live in `[-5, 5]`; scores are the clamped token mean mapped
/// linearly onto `[0, 1]`, with 0.5 for text that matches no token at all.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, f64>,
    emoji_map: BTreeMap<String, String>,
}

impl SentimentLexicon {
    pub const NEUTRAL: f64 = 0.5;
    pub const VALENCE_LIMIT: f64 = 5.0;

    pub fn new(entries: BTreeMap<String, f64>, emoji_map: BTreeMap<String, String>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(token, v)| (token.to_lowercase(), v))
            .collect();
        SentimentLexicon { entries, emoji_map }
    }

    pub fn emoji_map(&self) -> &BTreeMap<String, String> {
        &self.emoji_map
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Score an already-normalized text. Deterministic; always in `[0, 1]`.
    pub fn score(&self, normalized: &str) -> f64 {
        let mut sum = 0.0;
        let mut hits = 0usize;
        for token in normalized.split_whitespace() {
            if let Some(v) = self.entries.get(token) {
                sum += v;
                hits += 1;
            }
        }
        if hits == 0 {
            return Self::NEUTRAL;
        }
        let mean = (sum / hits as f64).clamp(-Self::VALENCE_LIMIT, Self::VALENCE_LIMIT);
        mean / (2.0 * Self::VALENCE_LIMIT) + 0.5
    }
}

/// Normalize raw tweet text: emoji mapped to tokens, URLs dropped,
/// case-folded, NFC-normalized, special and control characters stripped,
/// whitespace collapsed. Hashtag, mention and token-separator characters
/// (`#`, `@`, `:`, `_`) survive.
pub fn normalize_text(raw: &str, emoji_map: &BTreeMap<String, String>) -> String {
    let mut text = raw.to_owned();
    for (emoji, token) in emoji_map {
        if text.contains(emoji.as_str()) {
            text = text.replace(emoji.as_str(), &format!(" {token} "));
        }
    }

    let without_urls: Vec<&str> = text
        .split_whitespace()
        .filter(|tok| {
            let t = tok.to_lowercase();
            !(t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www."))
        })
        .collect();

    let folded: String = without_urls.join(" ").to_lowercase().nfc().collect();
    let filtered: String = folded
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() || matches!(c, '#' | '@' | ':' | '_') {
                c
            } else {
                ' '
            }
        })
        .collect();
    filtered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Named keyword set for a party (exclusive matching) or theme (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagOfWords {
    pub name: String,
    pub kind: BagKind,
    pub keywords: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BagKind {
    Party,
    Theme,
}

impl BagOfWords {
    /// True when at least one keyword is a substring of the normalized text.
    pub fn matches(&self, normalized: &str) -> bool {
        self.keywords.iter().any(|kw| normalized.contains(kw.as_str()))
    }
}

/// The five party bags, the five theme bags and the sentiment lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    party_bags: BTreeMap<Party, BagOfWords>,
    theme_bags: BTreeMap<Theme, BagOfWords>,
    pub lexicon: SentimentLexicon,
}

impl MatchConfig {
    pub fn new(
        party_keywords: BTreeMap<Party, Vec<String>>,
        theme_keywords: BTreeMap<Theme, Vec<String>>,
        lexicon: SentimentLexicon,
    ) -> Result<Self> {
        if party_keywords.len() != Party::COUNT {
            return Err(Error::config(format!(
                "need keyword bags for all {} parties, got {}",
                Party::COUNT,
                party_keywords.len()
            )));
        }
        if theme_keywords.len() != Theme::COUNT {
            return Err(Error::config(format!(
                "need keyword bags for all {} themes, got {}",
                Theme::COUNT,
                theme_keywords.len()
            )));
        }
        let normalize_bag = |name: &str, kind: BagKind, kws: Vec<String>| -> Result<BagOfWords> {
            let keywords: BTreeSet<String> = kws
                .iter()
                .map(|kw| normalize_text(kw, lexicon.emoji_map()))
                .filter(|kw| !kw.is_empty())
                .collect();
            if keywords.is_empty() {
                return Err(Error::config(format!("keyword bag {name} is empty")));
            }
            Ok(BagOfWords {
                name: name.to_owned(),
                kind,
                keywords,
            })
        };
        let mut party_bags = BTreeMap::new();
        for (party, kws) in party_keywords {
            party_bags.insert(party, normalize_bag(party.name(), BagKind::Party, kws)?);
        }
        let mut theme_bags = BTreeMap::new();
        for (theme, kws) in theme_keywords {
            theme_bags.insert(theme, normalize_bag(theme.name(), BagKind::Theme, kws)?);
        }
        Ok(MatchConfig {
            party_bags,
            theme_bags,
            lexicon,
        })
    }

    pub fn from_files(bags_path: &Path, lexicon_path: &Path) -> Result<Self> {
        let lexicon = load_lexicon(lexicon_path)?;
        let bags: BagsFile = toml::from_str(&std::fs::read_to_string(bags_path).map_err(
            |e| Error::config(format!("cannot read bags file {}: {e}", bags_path.display())),
        )?)?;

        let mut party_keywords = BTreeMap::new();
        for (name, kws) in bags.parties {
            let party = Party::from_name(&name)
                .ok_or_else(|| Error::config(format!("unknown party bag {name:?}")))?;
            party_keywords.insert(party, kws);
        }
        let mut theme_keywords = BTreeMap::new();
        for (name, kws) in bags.themes {
            let theme = Theme::from_name(&name)
                .ok_or_else(|| Error::config(format!("unknown theme bag {name:?}")))?;
            theme_keywords.insert(theme, kws);
        }
        MatchConfig::new(party_keywords, theme_keywords, lexicon)
    }

    pub fn party_bag(&self, party: Party) -> &BagOfWords {
        &self.party_bags[&party]
    }

    pub fn theme_bag(&self, theme: Theme) -> &BagOfWords {
        &self.theme_bags[&theme]
    }

    pub fn normalize(&self, raw: &str) -> String {
        normalize_text(raw, self.lexicon.emoji_map())
    }

    /// Per-theme hit vector in canonical Γ order. Themes are not exclusive.
    pub fn match_themes(&self, normalized: &str) -> [bool; Theme::COUNT] {
        let mut hits = [false; Theme::COUNT];
        for theme in Theme::ALL {
            hits[theme.index()] = self.theme_bags[&theme].matches(normalized);
        }
        hits
    }

    /// Exclusive one-hot party label: `Some(P)` iff exactly one party's bag
    /// matches; `None` when zero or two-plus parties match.
    pub fn match_party_exclusive(&self, normalized: &str) -> Option<Party> {
        let mut found = None;
        for party in Party::ALL {
            if self.party_bags[&party].matches(normalized) {
                if found.is_some() {
                    return None;
                }
                found = Some(party);
            }
        }
        found
    }
}

#[derive(Deserialize)]
struct BagsFile {
    parties: BTreeMap<String, Vec<String>>,
    themes: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct LexiconFile {
    #[serde(default)]
    valences: BTreeMap<String, f64>,
    #[serde(default)]
    emoji: BTreeMap<String, String>,
}

pub fn load_lexicon(path: &Path) -> Result<SentimentLexicon> {
    let file: LexiconFile = toml::from_str(&std::fs::read_to_string(path).map_err(|e| {
        Error::config(format!("cannot read lexicon file {}: {e}", path.display()))
    })?)?;
    for (token, v) in &file.valences {
        if !v.is_finite() || v.abs() > SentimentLexicon::VALENCE_LIMIT {
            return Err(Error::config(format!(
                "lexicon valence for {token:?} must be finite and within ±{}",
                SentimentLexicon::VALENCE_LIMIT
            )));
        }
    }
    Ok(SentimentLexicon::new(file.valences, file.emoji))
}

/// Augmentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AugmentReport {
    pub scored: usize,
    pub retweets_inherited: usize,
    pub retweet_fallbacks: usize,
    pub party_labeled: usize,
    pub theme_hits: usize,
}

/// For each tweet, find the tweet whose text stands in for it: retweets
/// follow their reference chain to the deepest reachable tweet, everything
/// else stands for itself. Cycle-safe.
fn effective_sources(corpus: &Corpus) -> BTreeMap<TweetId, TweetId> {
    let mut source: BTreeMap<TweetId, TweetId> = BTreeMap::new();
    for tid in corpus.tweets.keys() {
        if source.contains_key(tid) {
            continue;
        }
        let mut path: Vec<TweetId> = Vec::new();
        let mut seen: BTreeSet<TweetId> = BTreeSet::new();
        let mut cur = tid.clone();
        let root = loop {
            if let Some(known) = source.get(&cur) {
                break known.clone();
            }
            let t = &corpus.tweets[&cur];
            let next = match (&t.kind, t.ref_resolved, &t.ref_tid) {
                (TweetType::Retweet, Some(true), Some(r)) => r.clone(),
                _ => break cur.clone(),
            };
            if seen.contains(&next) || next == cur {
                // reference cycle: let the current tweet stand for itself
                break cur.clone();
            }
            seen.insert(cur.clone());
            path.push(cur);
            cur = next;
        };
        for hop in path {
            source.insert(hop, root.clone());
        }
        source.insert(cur, root);
    }
    source
}

/// Recompute every retweet's sentiment from its reference chain: a resolved
/// retweet takes the chain root's stored sentiment (scoring the root's own
/// text if it has none); a dangling-ref retweet is scored from its own text,
/// which carries the original text as a prefix anyway. Returns the number of
/// retweets that inherited a score.
pub fn propagate_retweet_sentiment(corpus: &mut Corpus, lexicon: &SentimentLexicon) -> usize {
    let sources = effective_sources(corpus);
    let mut updates: Vec<(TweetId, f64, bool)> = Vec::new();
    for (tid, tweet) in &corpus.tweets {
        if tweet.kind != TweetType::Retweet {
            continue;
        }
        let src = &sources[tid];
        let (sent, inherited) = if src == tid {
            (
                lexicon.score(&normalize_text(&tweet.text, lexicon.emoji_map())),
                false,
            )
        } else {
            let root = &corpus.tweets[src];
            let s = root.sentiment.unwrap_or_else(|| {
                lexicon.score(&normalize_text(&root.text, lexicon.emoji_map()))
            });
            (s, true)
        };
        updates.push((tid.clone(), sent, inherited));
    }
    let mut inherited_count = 0;
    for (tid, sent, inherited) in updates {
        corpus.tweets.get_mut(&tid).unwrap().sentiment = Some(sent);
        if inherited {
            inherited_count += 1;
        }
    }
    inherited_count
}

/// Full augmentation pass: resolve references, score sentiment (originals,
/// replies and quotes from their own text; retweets by inheritance), and set
/// theme hits and the exclusive party label (retweets matched against the
/// referenced tweet's text when resolvable).
pub fn augment_corpus(corpus: &mut Corpus, config: &MatchConfig) -> AugmentReport {
    resolve_references(corpus);
    let mut report = AugmentReport::default();

    let normalized: BTreeMap<TweetId, String> = corpus
        .tweets
        .iter()
        .map(|(tid, t)| (tid.clone(), config.normalize(&t.text)))
        .collect();
    let sources = effective_sources(corpus);

    struct Update {
        tid: TweetId,
        sentiment: Option<f64>,
        theme_hits: [bool; Theme::COUNT],
        party_label: Option<Party>,
    }

    let mut updates: Vec<Update> = Vec::new();
    for (tid, tweet) in &corpus.tweets {
        let src = &sources[tid];
        let match_text = if tweet.kind == TweetType::Retweet {
            &normalized[src]
        } else {
            &normalized[tid]
        };
        let theme_hits = config.match_themes(match_text);
        let party_label = config.match_party_exclusive(match_text);
        let sentiment = if tweet.kind == TweetType::Retweet {
            None // filled by propagation below
        } else {
            Some(config.lexicon.score(&normalized[tid]))
        };
        updates.push(Update {
            tid: tid.clone(),
            sentiment,
            theme_hits,
            party_label,
        });
    }

    for u in updates {
        let tweet = corpus.tweets.get_mut(&u.tid).unwrap();
        if let Some(s) = u.sentiment {
            tweet.sentiment = Some(s);
            report.scored += 1;
        }
        tweet.theme_hits = u.theme_hits;
        tweet.party_label = u.party_label;
        if u.party_label.is_some() {
            report.party_labeled += 1;
        }
        report.theme_hits += u.theme_hits.iter().filter(|h| **h).count();
    }

    report.retweets_inherited = propagate_retweet_sentiment(corpus, &config.lexicon);
    report.retweet_fallbacks = corpus
        .tweets
        .values()
        .filter(|t| t.kind == TweetType::Retweet)
        .count()
        - report.retweets_inherited;
    report
}
