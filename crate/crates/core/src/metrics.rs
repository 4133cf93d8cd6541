//! Per-post character-offset F1 and corpus aggregation.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Post, Prediction};
use crate::error::{Error, Result};
use crate::spans::SpanSet;

/// Number of bins in the toxic-fraction histogram.
pub const JACCARD_BINS: usize = 20;

/// F1 between two offset sets. Both empty scores 1; exactly one empty
/// scores 0.
pub fn per_post_f1(pred: &SpanSet, gold: &SpanSet) -> f64 {
    match (pred.is_empty(), gold.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => {
            let common = pred.intersection_len(gold);
            2.0 * common as f64 / (pred.len() + gold.len()) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostScore {
    pub id: usize,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_post: Vec<PostScore>,
    pub mean_f1: f64,
}

impl EvalReport {
    fn from_scores(per_post: Vec<PostScore>) -> Self {
        let mean_f1 = if per_post.is_empty() {
            0.0
        } else {
            per_post.iter().map(|s| s.f1).sum::<f64>() / per_post.len() as f64
        };
        EvalReport { per_post, mean_f1 }
    }

    /// Human-readable summary for terminals.
    pub fn summary(&self) -> String {
        let n = self.per_post.len();
        let perfect = self.per_post.iter().filter(|s| s.f1 == 1.0).count();
        let zero = self.per_post.iter().filter(|s| s.f1 == 0.0).count();
        let mut sorted: Vec<f64> = self.per_post.iter().map(|s| s.f1).collect();
        sorted.sort_by(f64::total_cmp);
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => sorted[n / 2],
            _ => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
        };

        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>10}", "posts", n);
        let _ = writeln!(out, "{:<12} {:>10.4}", "mean F1", self.mean_f1);
        let _ = writeln!(out, "{:<12} {:>10.4}", "median F1", median);
        let _ = writeln!(out, "{:<12} {:>10}", "F1 = 1", perfect);
        let _ = writeln!(out, "{:<12} {:>10}", "F1 = 0", zero);
        out
    }
}

/// Scores `preds` against the corpus. Every post needs exactly one prediction.
pub fn evaluate(preds: &[Prediction], c: &Corpus) -> Result<EvalReport> {
    let mut by_id: HashMap<usize, &SpanSet> = HashMap::with_capacity(preds.len());
    for p in preds {
        if c.get(p.id).is_none() {
            return Err(Error::UnknownPrediction(p.id));
        }
        if by_id.insert(p.id, &p.spans).is_some() {
            return Err(Error::DuplicateId(p.id));
        }
    }
    let scores = c
        .iter()
        .map(|post| {
            let pred = by_id
                .get(&post.id)
                .ok_or(Error::MissingPrediction(post.id))?;
            Ok(PostScore {
                id: post.id,
                f1: per_post_f1(pred, &post.gold),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_scores(scores))
}

/// Jaccard index of the gold offsets against all offsets of the text, which
/// reduces to `|gold| / len(text)`.
pub fn toxic_fraction(p: &Post) -> Result<f64> {
    let len = p.char_len();
    if len == 0 {
        return Err(Error::EmptyText);
    }
    Ok(p.gold.len() as f64 / len as f64)
}

/// Histogram bin of `toxic / len` in integer arithmetic, so values such as
/// 3/20 land exactly on their lower bin edge. 1.0 goes to the top bin.
pub fn jaccard_bin(toxic: usize, len: usize) -> usize {
    if len == 0 {
        return 0;
    }
    ((toxic * JACCARD_BINS) / len).min(JACCARD_BINS - 1)
}
