//! Streaming rumour detection engine.
//!
//! Scores each incoming social-media message the moment it arrives, in a
//! single pass over the stream. The score combines three signal families:
//!
//! - **novelty features** — how much of the message is unconfirmed by a
//!   trusted news corpus, measured by hashing all kterms (unordered term
//!   combinations of size 1..=3) against per-k Bloom filters built from the
//!   news articles, for all terms and for the top tf-idf keywords;
//! - **context features** — 51 instantly computable text features
//!   (punctuation, POS, sentiment, emotion, extreme words, social-media
//!   markers, length, URLs);
//! - **pseudo feedback** — maximum tf-idf cosine similarity to the k most
//!   recent messages whose rumour score exceeded a threshold.
//!
//! A linear model trained in two rounds (non-PF weights first, then the PF
//! weight on a replay of the training stream) produces the rumour score,
//! which is compared against an accuracy-optimal threshold.

pub mod config;
pub mod detect;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod model;
pub mod novelty;
pub mod pseudofeedback;
pub mod synth;
pub mod textstats;

mod bin;
mod hash;

pub use config::RunConfig;
pub use detect::{Detector, Verdict};
pub use features::{FeatureVector, LexiconPack};
pub use ingest::{Message, NewsArticle, TokenizedDoc};
pub use model::Model;
pub use novelty::{KtermMemory, TrustedMemory};
pub use textstats::Vocabulary;
