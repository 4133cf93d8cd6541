use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::spans::{label_tokens, normalize_lexeme, tokenize, ContiguousSpan, SpanSet};

use super::SpanExtractor;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexEntry {
    pub in_span: u64,
    pub total: u64,
}

/// Token-level tagger: a lexeme is toxic when it was seen often enough and
/// mostly inside gold spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconModel {
    pub entries: BTreeMap<String, LexEntry>,
    pub min_count: u64,
    pub min_ratio: f64,
}

impl LexiconModel {
    /// A lexicon in which exactly `words` (normalized) are active.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries = words
            .into_iter()
            .filter_map(|w| normalize_lexeme(w.as_ref()))
            .map(|(lex, _)| {
                (
                    lex,
                    LexEntry {
                        in_span: 1,
                        total: 1,
                    },
                )
            })
            .collect();
        LexiconModel {
            entries,
            min_count: 1,
            min_ratio: 1.0,
        }
    }

    pub fn is_active(&self, lexeme: &str) -> bool {
        self.entries.get(lexeme).is_some_and(|e| {
            e.total >= self.min_count && e.in_span as f64 >= self.min_ratio * e.total as f64
        })
    }

    pub fn active_lexemes(&self) -> impl Iterator<Item = &str> {
        self.entries
            .keys()
            .filter(|k| self.is_active(k))
            .map(String::as_str)
    }

    /// Alphanumeric cores of the active tokens of `text`, in order.
    fn active_cores(&self, text: &str) -> Vec<(usize, ContiguousSpan)> {
        tokenize(text)
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let (lex, core) = normalize_lexeme(&t.surface)?;
                self.is_active(&lex).then_some((
                    i,
                    ContiguousSpan {
                        start: t.start + core.start,
                        end: t.start + core.end,
                    },
                ))
            })
            .collect()
    }
}

pub fn train_lexicon(c: &Corpus, min_count: u64, min_ratio: f64) -> Result<LexiconModel> {
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if min_count < 1 {
        return Err(Error::InvalidConfig("min_count must be >= 1".into()));
    }
    if !(min_ratio > 0.0 && min_ratio <= 1.0) {
        return Err(Error::InvalidConfig("min_ratio must be in (0, 1]".into()));
    }
    let mut entries: BTreeMap<String, LexEntry> = BTreeMap::new();
    for post in c {
        for (tok, toxic) in label_tokens(post) {
            if let Some((lex, _)) = normalize_lexeme(&tok.surface) {
                let e = entries.entry(lex).or_default();
                e.total += 1;
                e.in_span += u64::from(toxic);
            }
        }
    }
    Ok(LexiconModel {
        entries,
        min_count,
        min_ratio,
    })
}

impl SpanExtractor for LexiconModel {
    fn extract_all(&self, text: &str) -> SpanSet {
        SpanSet::from_offsets(
            self.active_cores(text)
                .into_iter()
                .flat_map(|(_, r)| r.start..r.end),
        )
    }

    /// First run of active tokens that sit next to each other in the token
    /// stream, from the first core's start to the last core's end.
    fn extract_one(&self, text: &str) -> SpanSet {
        let cores = self.active_cores(text);
        let Some(&(first_idx, first)) = cores.first() else {
            return SpanSet::new();
        };
        let mut end = first.end;
        let mut prev = first_idx;
        for &(idx, r) in &cores[1..] {
            if idx != prev + 1 {
                break;
            }
            end = r.end;
            prev = idx;
        }
        SpanSet::from_range(first.start, end)
    }
}
