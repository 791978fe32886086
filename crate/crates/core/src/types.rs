//! Shared domain types: identifiers, tweet types, parties, themes and user
//! classes, each with a fixed canonical ordering.
//!
//! The canonical orders matter: feature vectors, CSV columns and tie-breaking
//! rules are all defined in terms of them. Tweet types follow Π = {original,
//! retweet, reply, quote}; parties follow ℙ = {UP, PSOE, CS, PP, VOX}; themes
//! follow Γ = {AbascalEH, Catalonia, Exhumation, Debate, Election}.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Opaque tweet identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TweetId(pub String);

/// Opaque user identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl TweetId {
    pub fn new(id: impl Into<String>) -> Self {
        TweetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl UserId {
    pub fn new(id: impl Into<String>) -> Self {
        UserId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TweetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The four collected interaction kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetType {
    Original,
    Retweet,
    Reply,
    Quote,
}

impl TweetType {
    pub const ALL: [TweetType; 4] = [
        TweetType::Original,
        TweetType::Retweet,
        TweetType::Reply,
        TweetType::Quote,
    ];

    pub const COUNT: usize = 4;

    /// Index in canonical Π order.
    pub fn index(self) -> usize {
        match self {
            TweetType::Original => 0,
            TweetType::Retweet => 1,
            TweetType::Reply => 2,
            TweetType::Quote => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TweetType::Original => "original",
            TweetType::Retweet => "retweet",
            TweetType::Reply => "reply",
            TweetType::Quote => "quote",
        }
    }
}

impl fmt::Display for TweetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The five profiled political parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    UP,
    PSOE,
    CS,
    PP,
    VOX,
}

impl Party {
    pub const ALL: [Party; 5] = [Party::UP, Party::PSOE, Party::CS, Party::PP, Party::VOX];

    pub const COUNT: usize = 5;

    /// Index in canonical ℙ order.
    pub fn index(self) -> usize {
        match self {
            Party::UP => 0,
            Party::PSOE => 1,
            Party::CS => 2,
            Party::PP => 3,
            Party::VOX => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::UP => "UP",
            Party::PSOE => "PSOE",
            Party::CS => "CS",
            Party::PP => "PP",
            Party::VOX => "VOX",
        }
    }

    pub fn from_name(name: &str) -> Option<Party> {
        match name {
            "UP" => Some(Party::UP),
            "PSOE" => Some(Party::PSOE),
            "CS" => Some(Party::CS),
            "PP" => Some(Party::PP),
            "VOX" => Some(Party::VOX),
            _ => None,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The five tracked event themes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theme {
    AbascalEH,
    Catalonia,
    Exhumation,
    Debate,
    Election,
}

impl Theme {
    pub const ALL: [Theme; 5] = [
        Theme::AbascalEH,
        Theme::Catalonia,
        Theme::Exhumation,
        Theme::Debate,
        Theme::Election,
    ];

    pub const COUNT: usize = 5;

    /// Index in canonical Γ order.
    pub fn index(self) -> usize {
        match self {
            Theme::AbascalEH => 0,
            Theme::Catalonia => 1,
            Theme::Exhumation => 2,
            Theme::Debate => 3,
            Theme::Election => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theme::AbascalEH => "AbascalEH",
            Theme::Catalonia => "Catalonia",
            Theme::Exhumation => "Exhumation",
            Theme::Debate => "Debate",
            Theme::Election => "Election",
        }
    }

    pub fn from_name(name: &str) -> Option<Theme> {
        match name {
            "AbascalEH" => Some(Theme::AbascalEH),
            "Catalonia" => Some(Theme::Catalonia),
            "Exhumation" => Some(Theme::Exhumation),
            "Debate" => Some(Theme::Debate),
            "Election" => Some(Theme::Election),
            _ => None,
        }
    }
}

impl fmt::Display for Theme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Gate outcome for a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Human,
    Uncertain,
    Bot,
    Removed,
}

impl UserClass {
    pub const ALL: [UserClass; 4] = [
        UserClass::Human,
        UserClass::Uncertain,
        UserClass::Bot,
        UserClass::Removed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UserClass::Human => "human",
            UserClass::Uncertain => "uncertain",
            UserClass::Bot => "bot",
            UserClass::Removed => "removed",
        }
    }
}

impl fmt::Display for UserClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
