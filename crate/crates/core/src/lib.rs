//! Batch analysis of tweet/user corpora: human-vs-bot gating from external
//! bot scores, per-bot political-party affinity via a reject-option ensemble
//! over aspect sentiment features, and friendship-graph and timeline reports.
//!
//! The crate is organised along the pipeline stages:
//!
//! - [`corpus`] — load, window-filter, reference-resolve and anonymize the
//!   tweet and user collections;
//! - [`lexicon`] — deterministic sentiment scoring, theme bags, and the
//!   exclusive one-hot party labelling of tweet texts;
//! - [`gate`] — percentile-based human/uncertain/bot classification of users
//!   from their bot scores;
//! - [`profiler`] — the 120-dimensional per-user average-sentiment feature
//!   vectors;
//! - [`ensemble`] — six first-party classifiers, stratified cross-validation,
//!   probability fusion and the reject-option affinity decision;
//! - [`graph`] — undirected bot friendship graph, closeness centrality, giant
//!   component, force-directed layout and GEXF export;
//! - [`reports`] — the quantitative tables and figure-backing CSV series,
//!   plus a seeded synthetic-corpus generator.

pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod gate;
pub mod graph;
pub mod lexicon;
pub mod profiler;
pub mod reports;
pub mod stats;
pub mod types;

pub use error::{Error, Result};
