//! Annotation-quality checks: lexemes labeled both ways across the corpus,
//! gold spans with suspicious shapes, and per-post prediction/gold diffs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Prediction};
use crate::error::{Error, Result};
use crate::spans::{label_tokens, normalize_lexeme, span_surface, tokenize, ContiguousSpan};

const MAX_EXAMPLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexemeInconsistency {
    pub lexeme: String,
    pub toxic_occurrences: usize,
    pub total_occurrences: usize,
    /// Up to three posts where the lexeme is inside a gold span.
    pub toxic_examples: Vec<usize>,
    /// Up to three posts where it is not.
    pub clean_examples: Vec<usize>,
}

#[derive(Default)]
struct Tally {
    toxic: usize,
    total: usize,
    toxic_examples: Vec<usize>,
    clean_examples: Vec<usize>,
}

fn note(examples: &mut Vec<usize>, id: usize) {
    if examples.len() < MAX_EXAMPLES && examples.last() != Some(&id) {
        examples.push(id);
    }
}

/// Lexemes seen at least `min_total` times with mixed labels, most frequent
/// first.
pub fn consistency_report(c: &Corpus, min_total: usize) -> Result<Vec<LexemeInconsistency>> {
    if min_total < 2 {
        return Err(Error::InvalidConfig("min_total must be >= 2".into()));
    }
    let mut tallies: HashMap<String, Tally> = HashMap::new();
    for post in c {
        for (tok, toxic) in label_tokens(post) {
            let Some((lexeme, _)) = normalize_lexeme(&tok.surface) else {
                continue;
            };
            let t = tallies.entry(lexeme).or_default();
            t.total += 1;
            if toxic {
                t.toxic += 1;
                note(&mut t.toxic_examples, post.id);
            } else {
                note(&mut t.clean_examples, post.id);
            }
        }
    }
    let mut out: Vec<LexemeInconsistency> = tallies
        .into_iter()
        .filter(|(_, t)| t.total >= min_total && t.toxic > 0 && t.toxic < t.total)
        .map(|(lexeme, t)| LexemeInconsistency {
            lexeme,
            toxic_occurrences: t.toxic,
            total_occurrences: t.total,
            toxic_examples: t.toxic_examples,
            clean_examples: t.clean_examples,
        })
        .collect();
    out.sort_by(|a, b| {
        b.total_occurrences
            .cmp(&a.total_occurrences)
            .then_with(|| a.lexeme.cmp(&b.lexeme))
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeReason {
    NonWordCharacters,
    PartialToken,
}

impl fmt::Display for ShapeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShapeReason::NonWordCharacters => "non-word characters",
            ShapeReason::PartialToken => "partial token",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeFlag {
    pub post_id: usize,
    pub span: ContiguousSpan,
    pub surface: String,
    pub reason: ShapeReason,
}

fn has_non_word_chars(surface: &str) -> bool {
    let chars: Vec<char> = surface.chars().collect();
    let last = chars.len().saturating_sub(1);
    chars.iter().enumerate().any(|(i, &c)| {
        let ok = c.is_alphanumeric() || c == '\'' || c == '-' || (c == ' ' && i > 0 && i < last);
        !ok
    })
}

/// Gold ranges containing punctuation or symbols, or starting or ending
/// inside a word. A range can be flagged for both.
pub fn shape_flags(c: &Corpus) -> Vec<ShapeFlag> {
    let mut flags = Vec::new();
    for post in c {
        let ranges = post.gold.ranges();
        if ranges.is_empty() {
            continue;
        }
        // Cuts are judged against each token's alphanumeric core, so a span
        // that stops before trailing punctuation ("stake" in "stake.") is whole.
        let cores: Vec<ContiguousSpan> = tokenize(&post.text)
            .iter()
            .filter_map(|t| {
                let (_, core) = normalize_lexeme(&t.surface)?;
                Some(ContiguousSpan {
                    start: t.start + core.start,
                    end: t.start + core.end,
                })
            })
            .collect();
        let cuts = |pos: usize| cores.iter().any(|t| t.start < pos && pos < t.end);
        for r in ranges {
            // Gold offsets are validated against the text on construction.
            let surface = span_surface(&post.text, r).unwrap_or_default().to_string();
            let mut push = |reason| {
                flags.push(ShapeFlag {
                    post_id: post.id,
                    span: r,
                    surface: surface.clone(),
                    reason,
                })
            };
            if has_non_word_chars(&surface) {
                push(ShapeReason::NonWordCharacters);
            }
            if cuts(r.start) || cuts(r.end) {
                push(ShapeReason::PartialToken);
            }
        }
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanDiff {
    pub post_id: usize,
    /// Gold ranges the prediction does not touch at all.
    pub missed: Vec<ContiguousSpan>,
    /// Predicted ranges that do not touch gold at all.
    pub spurious: Vec<ContiguousSpan>,
}

/// Posts whose prediction misses a gold range outright or invents one.
/// Partial overlaps are not reported.
pub fn diff_report(preds: &[Prediction], c: &Corpus) -> Result<Vec<SpanDiff>> {
    let mut by_id = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.id, &p.spans).is_some() {
            return Err(Error::DuplicateId(p.id));
        }
    }
    let mut out = Vec::new();
    for post in c {
        let pred = by_id
            .get(&post.id)
            .ok_or(Error::MissingPrediction(post.id))?;
        let missed: Vec<_> = post
            .gold
            .ranges()
            .into_iter()
            .filter(|r| !pred.overlaps(*r))
            .collect();
        let spurious: Vec<_> = pred
            .ranges()
            .into_iter()
            .filter(|r| !post.gold.overlaps(*r))
            .collect();
        if !missed.is_empty() || !spurious.is_empty() {
            out.push(SpanDiff {
                post_id: post.id,
                missed,
                spurious,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub consistency: Vec<LexemeInconsistency>,
    pub shape_flags: Vec<ShapeFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffs: Option<Vec<SpanDiff>>,
}

impl AuditReport {
    /// Plain-text tables.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "inconsistent lexemes: {}", self.consistency.len());
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6}  examples (toxic | clean)",
            "lexeme", "toxic", "total"
        );
        for r in &self.consistency {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>6}  {:?} | {:?}",
                r.lexeme,
                r.toxic_occurrences,
                r.total_occurrences,
                r.toxic_examples,
                r.clean_examples
            );
        }
        let _ = writeln!(out, "\nshape flags: {}", self.shape_flags.len());
        let mut by_reason: BTreeMap<ShapeReason, usize> = BTreeMap::new();
        for f in &self.shape_flags {
            *by_reason.entry(f.reason).or_default() += 1;
            let _ = writeln!(
                out,
                "{:>8} {:<14} {:<22} {:?}",
                f.post_id,
                f.span.to_string(),
                f.reason.to_string(),
                f.surface
            );
        }
        for (reason, n) in by_reason {
            let _ = writeln!(out, "  {reason}: {n}");
        }
        if let Some(diffs) = &self.diffs {
            let _ = writeln!(
                out,
                "\nposts with missed or spurious spans: {}",
                diffs.len()
            );
            for d in diffs {
                let fmt_ranges = |rs: &[ContiguousSpan]| {
                    rs.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let _ = writeln!(
                    out,
                    "{:>8} missed: {:<30} spurious: {}",
                    d.post_id,
                    fmt_ranges(&d.missed),
                    fmt_ranges(&d.spurious)
                );
            }
        }
        out
    }
}
