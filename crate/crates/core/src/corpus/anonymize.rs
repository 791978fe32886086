//! One-way identifier anonymization.
//!
//! Every tweet and user id is replaced by a 128-bit UUID and all internal
//! references (authors, reference targets, follower/following sets) are
//! remapped consistently. In `Random` mode the old-to-new map is never
//! persisted, so the transformation is one-way. `Keyed` mode derives the
//! UUIDs from a secret key instead, which makes runs reproducible.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use uuid::Uuid;

use super::Corpus;
use crate::types::{TweetId, UserId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnonymizeMode {
    /// Fresh random UUIDs; mapping is discarded.
    Random,
    /// UUIDs derived deterministically from the key.
    Keyed(String),
}

struct IdMapper {
    mode: AnonymizeMode,
    cache: BTreeMap<(u8, String), String>,
}

impl IdMapper {
    fn new(mode: AnonymizeMode) -> Self {
        IdMapper {
            mode,
            cache: BTreeMap::new(),
        }
    }

    fn map(&mut self, domain: u8, old: &str) -> String {
        if let Some(mapped) = self.cache.get(&(domain, old.to_owned())) {
            return mapped.clone();
        }
        let fresh = match &self.mode {
            AnonymizeMode::Random => Uuid::new_v4().to_string(),
            AnonymizeMode::Keyed(key) => {
                let mut hasher = Sha256::new();
                hasher.update(b"botspotter-anon-v1");
                hasher.update([domain]);
                hasher.update(key.as_bytes());
                hasher.update([0u8]);
                hasher.update(old.as_bytes());
                let digest = hasher.finalize();
                let mut bytes = [0u8; 16];
                bytes.copy_from_slice(&digest[..16]);
                uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
            }
        };
        self.cache.insert((domain, old.to_owned()), fresh.clone());
        fresh
    }

    fn tweet(&mut self, old: &TweetId) -> TweetId {
        TweetId::new(self.map(b't', old.as_str()))
    }

    fn user(&mut self, old: &UserId) -> UserId {
        UserId::new(self.map(b'u', old.as_str()))
    }
}

/// Replace every tweet and user id with a UUID, remapping authors, reference
/// targets (including dangling ones, consistently), follower/following sets
/// and training labels. Everything else is untouched.
pub fn anonymize(corpus: Corpus, mode: AnonymizeMode) -> Corpus {
    let mut mapper = IdMapper::new(mode);
    let mut out = Corpus::new(corpus.window);

    for (tid, mut tweet) in corpus.tweets {
        let new_tid = mapper.tweet(&tid);
        tweet.tid = new_tid.clone();
        tweet.author_uid = mapper.user(&tweet.author_uid);
        tweet.ref_tid = tweet.ref_tid.as_ref().map(|r| mapper.tweet(r));
        out.tweets.insert(new_tid, tweet);
    }
    for (uid, mut user) in corpus.users {
        let new_uid = mapper.user(&uid);
        user.uid = new_uid.clone();
        user.followers = user.followers.iter().map(|u| mapper.user(u)).collect();
        user.followings = user.followings.iter().map(|u| mapper.user(u)).collect();
        out.users.insert(new_uid, user);
    }
    out
}
