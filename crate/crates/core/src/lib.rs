//! Toxic span detection at the character-offset level.
//!
//! * [`corpus`]: the `spans,text` file format, k-fold splits, statistics,
//!   NER export and prediction files.
//! * [`spans`]: offset sets, ranges, tokenization, and text edits that keep
//!   track of original positions.
//! * [`metrics`]: per-post F1 and its corpus mean.
//! * [`models`]: a hashed n-gram toxicity gate and a lexicon span tagger.
//! * [`pipeline`]: gate → extract → remove → recheck.
//! * [`audit`]: annotation consistency and span-shape checks.

pub mod audit;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod spans;
pub mod synthetic;

pub use corpus::{Corpus, Post, Prediction};
pub use error::{Error, Result};
pub use spans::{ContiguousSpan, OffsetMap, SpanSet, Token};
