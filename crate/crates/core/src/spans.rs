//! Character-offset arithmetic.
//!
//! All offsets in this crate are Unicode scalar-value indices into a `str`,
//! never byte indices. A [`SpanSet`] is the flat sorted offset list the
//! corpus files carry; a [`ContiguousSpan`] is a half-open `[start, end)` run.
//! [`offsets_to_ranges`] and [`ranges_to_offsets`] convert between them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Post;
use crate::error::{Error, Result};

/// A sorted set of character offsets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct SpanSet(Vec<usize>);

impl SpanSet {
    pub fn new() -> Self {
        SpanSet(Vec::new())
    }

    /// Builds the set from offsets in any order, dropping duplicates.
    pub fn from_offsets<I: IntoIterator<Item = usize>>(offsets: I) -> Self {
        let mut v: Vec<usize> = offsets.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SpanSet(v)
    }

    /// All offsets in `[start, end)`.
    pub fn from_range(start: usize, end: usize) -> Self {
        SpanSet((start..end).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.0.binary_search(&offset).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `|self ∩ other|`, by a merge walk over both sorted lists.
    pub fn intersection_len(&self, other: &SpanSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn union(&self, other: &SpanSet) -> SpanSet {
        SpanSet::from_offsets(self.iter().chain(other.iter()))
    }

    pub fn ranges(&self) -> Vec<ContiguousSpan> {
        offsets_to_ranges(self)
    }

    /// `true` if any offset of `span` is in the set.
    pub fn overlaps(&self, span: ContiguousSpan) -> bool {
        let idx = self.0.partition_point(|&o| o < span.start);
        self.0.get(idx).is_some_and(|&o| o < span.end)
    }
}

impl From<Vec<usize>> for SpanSet {
    fn from(v: Vec<usize>) -> Self {
        SpanSet::from_offsets(v)
    }
}

impl From<SpanSet> for Vec<usize> {
    fn from(s: SpanSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for SpanSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SpanSet::from_offsets(iter)
    }
}

/// Renders as the bracketed list used in corpus and prediction files,
/// e.g. `[7, 8, 9]`.
impl fmt::Display for SpanSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("]")
    }
}

/// Half-open character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContiguousSpan {
    pub start: usize,
    pub end: usize,
}

impl ContiguousSpan {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::EmptyRange(start));
        }
        Ok(ContiguousSpan { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &ContiguousSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for ContiguousSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Maximal runs of consecutive offsets, one range per run.
pub fn offsets_to_ranges(s: &SpanSet) -> Vec<ContiguousSpan> {
    let mut out = Vec::new();
    let mut it = s.iter();
    let Some(first) = it.next() else {
        return out;
    };
    let (mut start, mut prev) = (first, first);
    for o in it {
        if o != prev + 1 {
            out.push(ContiguousSpan {
                start,
                end: prev + 1,
            });
            start = o;
        }
        prev = o;
    }
    out.push(ContiguousSpan {
        start,
        end: prev + 1,
    });
    out
}

/// Union of all offsets covered by `rs`; overlapping input is fine.
pub fn ranges_to_offsets(rs: &[ContiguousSpan]) -> SpanSet {
    SpanSet::from_offsets(rs.iter().flat_map(|r| r.start..r.end))
}

/// Number of characters (scalar values) in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Byte index of character offset `offset`, or `text.len()` at the end.
fn byte_index(text: &str, offset: usize) -> Option<usize> {
    text.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .nth(offset)
}

/// The exact substring covered by `r`.
pub fn span_surface(text: &str, r: ContiguousSpan) -> Result<&str> {
    let oob = || Error::RangeOutOfBounds {
        start: r.start,
        end: r.end,
        len: char_len(text),
    };
    if r.start > r.end {
        return Err(oob());
    }
    let b0 = byte_index(text, r.start).ok_or_else(oob)?;
    let b1 = byte_index(text, r.end).ok_or_else(oob)?;
    Ok(&text[b0..b1])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn span(&self) -> ContiguousSpan {
        ContiguousSpan {
            start: self.start,
            end: self.end,
        }
    }
}

/// Splits on whitespace runs. Punctuation stays attached to its token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        n = i + 1;
        if c.is_whitespace() {
            if let Some((start, surface)) = current.take() {
                tokens.push(Token {
                    surface,
                    start,
                    end: i,
                });
            }
        } else {
            current.get_or_insert_with(|| (i, String::new())).1.push(c);
        }
    }
    if let Some((start, surface)) = current {
        tokens.push(Token {
            surface,
            start,
            end: n,
        });
    }
    tokens
}

/// A token is toxic iff any of its characters is in the post's gold set.
pub fn label_tokens(p: &Post) -> Vec<(Token, bool)> {
    tokenize(&p.text)
        .into_iter()
        .map(|t| {
            let toxic = p.gold.overlaps(t.span());
            (t, toxic)
        })
        .collect()
}

/// Lowercased lexeme with surrounding non-alphanumerics stripped, plus the
/// character range of the stripped core within the token's own text.
/// `None` when the token has no alphanumeric character.
pub fn normalize_lexeme(surface: &str) -> Option<(String, ContiguousSpan)> {
    let chars: Vec<char> = surface.chars().collect();
    let start = chars.iter().position(|c| c.is_alphanumeric())?;
    let end = chars.iter().rposition(|c| c.is_alphanumeric())? + 1;
    let lexeme = chars[start..end].iter().collect::<String>().to_lowercase();
    Some((lexeme, ContiguousSpan { start, end }))
}

/// Positions of the characters of a derived text in its original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    forward: Vec<usize>,
}

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        OffsetMap {
            forward: (0..len).collect(),
        }
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    /// Length of the derived text this map describes.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Chains `self` (derived → original) after `next` (re-derived → derived).
    pub fn compose(&self, next: &OffsetMap) -> Result<OffsetMap> {
        let forward = next
            .forward
            .iter()
            .map(|&i| {
                self.forward.get(i).copied().ok_or_else(|| {
                    Error::Invariant(format!(
                        "offset map position {i} beyond derived length {}",
                        self.forward.len()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Ok(OffsetMap { forward })
    }
}

/// Excises `rs` from `text`. Ranges may arrive in any order but must be
/// disjoint and in bounds; adjacent ranges are fine.
pub fn delete_ranges(text: &str, rs: &[ContiguousSpan]) -> Result<(String, OffsetMap)> {
    let chars: Vec<char> = text.chars().collect();
    let mut sorted = rs.to_vec();
    sorted.sort();
    for r in &sorted {
        if r.start >= r.end || r.end > chars.len() {
            return Err(Error::RangeOutOfBounds {
                start: r.start,
                end: r.end,
                len: chars.len(),
            });
        }
    }
    for w in sorted.windows(2) {
        if w[0].overlaps(&w[1]) {
            return Err(Error::OverlappingRanges(
                w[0].start, w[0].end, w[1].start, w[1].end,
            ));
        }
    }

    let mut derived = String::with_capacity(text.len());
    let mut forward = Vec::with_capacity(chars.len());
    let mut next = sorted.iter().peekable();
    for (i, &c) in chars.iter().enumerate() {
        while next.peek().is_some_and(|r| r.end <= i) {
            next.next();
        }
        if next.peek().is_some_and(|r| r.start <= i) {
            continue;
        }
        derived.push(c);
        forward.push(i);
    }
    Ok((derived, OffsetMap { forward }))
}

/// Lifts derived-text offsets back to the original text.
pub fn remap_to_original(m: &OffsetMap, s: &SpanSet) -> Result<SpanSet> {
    s.iter()
        .map(|i| {
            m.forward.get(i).copied().ok_or(Error::RangeOutOfBounds {
                start: i,
                end: i + 1,
                len: m.len(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(SpanSet::from_offsets)
}

/// Widens each range by one adjacent whitespace character, preferring the
/// one before it. Widened ranges are merged so the result stays disjoint.
pub fn absorb_adjacent_whitespace(text: &str, rs: &[ContiguousSpan]) -> Vec<ContiguousSpan> {
    let chars: Vec<char> = text.chars().collect();
    let is_ws = |i: usize| chars.get(i).is_some_and(|c| c.is_whitespace());
    let covered = ranges_to_offsets(rs);
    let mut widened = Vec::with_capacity(rs.len());
    for r in rs {
        let mut w = *r;
        if r.start > 0 && is_ws(r.start - 1) && !covered.contains(r.start - 1) {
            w.start -= 1;
        } else if is_ws(r.end) && !covered.contains(r.end) {
            w.end += 1;
        }
        widened.push(w);
    }
    offsets_to_ranges(&ranges_to_offsets(&widened))
}

/// Turns a post with k > 1 gold ranges into k posts that each keep exactly
/// one range; the others are deleted along with one neighbouring space.
pub fn split_multispan(p: &Post) -> Result<Vec<Post>> {
    let ranges = p.gold.ranges();
    if ranges.len() <= 1 {
        return Ok(vec![p.clone()]);
    }
    let mut out = Vec::with_capacity(ranges.len());
    for (i, kept) in ranges.iter().enumerate() {
        let others: Vec<ContiguousSpan> = ranges
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| *r)
            .collect();
        let deletions = absorb_adjacent_whitespace(&p.text, &others);
        let (text, map) = delete_ranges(&p.text, &deletions)?;
        let gold: SpanSet = map
            .forward()
            .iter()
            .enumerate()
            .filter(|&(_, &orig)| orig >= kept.start && orig < kept.end)
            .map(|(d, _)| d)
            .collect();
        if gold.len() != kept.len() {
            return Err(Error::Invariant(format!(
                "split of post {} lost characters of kept range {kept}",
                p.id
            )));
        }
        out.push(Post {
            id: p.id,
            text,
            gold,
        });
    }
    Ok(out)
}

/// For each phrase in order, claims the leftmost occurrence that does not
/// touch an already-claimed character.
pub fn match_phrase_offsets<S: AsRef<str>>(text: &str, phrases: &[S]) -> Result<SpanSet> {
    let chars: Vec<char> = text.chars().collect();
    let mut consumed = vec![false; chars.len()];
    for phrase in phrases {
        let needle: Vec<char> = phrase.as_ref().chars().collect();
        if needle.is_empty() {
            continue;
        }
        let hit = (0..=chars.len().saturating_sub(needle.len()))
            .filter(|&p| p + needle.len() <= chars.len())
            .find(|&p| {
                chars[p..p + needle.len()] == needle[..]
                    && !consumed[p..p + needle.len()].iter().any(|&c| c)
            })
            .ok_or_else(|| Error::PhraseNotFound(phrase.as_ref().to_string()))?;
        consumed[hit..hit + needle.len()].fill(true);
    }
    Ok(consumed
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c)
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROW1: &str = "Pretty damned eloquent ... :)";
    const ROW3: &str = "Nauseating and disgusting. Thank goodness the First Amendment permits people to demonstrate their stupidity.";
    const MULTI: &str = "This bitch is so fucking idiot.";

    fn span(start: usize, end: usize) -> ContiguousSpan {
        ContiguousSpan { start, end }
    }

    #[test]
    fn ranges_from_table_row_three() {
        let s: SpanSet = (0..10).chain(15..25).chain(98..107).collect();
        assert_eq!(
            offsets_to_ranges(&s),
            vec![span(0, 10), span(15, 25), span(98, 107)]
        );
        assert!(offsets_to_ranges(&SpanSet::new()).is_empty());
        assert_eq!(
            offsets_to_ranges(&SpanSet::from_offsets([5])),
            vec![span(5, 6)]
        );
    }

    #[test]
    fn offsets_from_ranges() {
        assert_eq!(
            ranges_to_offsets(&[span(7, 13)]),
            SpanSet::from_range(7, 13)
        );
        assert_eq!(
            ranges_to_offsets(&[span(0, 3), span(2, 5)]),
            SpanSet::from_range(0, 5)
        );
        assert!(ranges_to_offsets(&[]).is_empty());
    }

    #[test]
    fn surfaces() {
        assert_eq!(span_surface(ROW1, span(7, 13)).unwrap(), "damned");
        assert_eq!(span_surface(ROW1, span(0, 29)).unwrap(), ROW1);
        assert_eq!(span_surface(ROW3, span(15, 25)).unwrap(), "disgusting");
        assert!(matches!(
            span_surface(ROW1, span(20, 30)),
            Err(Error::RangeOutOfBounds { .. })
        ));
    }

    #[test]
    fn surface_uses_character_offsets() {
        let text = "café idiot";
        assert_eq!(span_surface(text, span(5, 10)).unwrap(), "idiot");
        assert_eq!(span_surface(text, span(3, 4)).unwrap(), "é");
    }

    #[test]
    fn tokenizer_offsets() {
        let toks = tokenize(ROW1);
        let surfaces: Vec<_> = toks.iter().map(|t| t.surface.as_str()).collect();
        let starts: Vec<_> = toks.iter().map(|t| t.start).collect();
        assert_eq!(surfaces, ["Pretty", "damned", "eloquent", "...", ":)"]);
        assert_eq!(starts, [0, 7, 14, 23, 27]);
        assert!(tokenize("").is_empty());
        assert_eq!(
            tokenize("  a  "),
            vec![Token {
                surface: "a".into(),
                start: 2,
                end: 3
            }]
        );
    }

    #[test]
    fn token_labels_use_any_overlap() {
        let p = Post::new(0, ROW1, SpanSet::from_range(7, 13)).unwrap();
        let toxic: Vec<_> = label_tokens(&p)
            .into_iter()
            .filter(|(_, t)| *t)
            .map(|(t, _)| t.surface)
            .collect();
        assert_eq!(toxic, ["damned"]);

        let clean = Post::new(0, ROW1, SpanSet::new()).unwrap();
        assert!(label_tokens(&clean).iter().all(|(_, t)| !t));

        let half = Post::new(0, ROW1, SpanSet::from_range(7, 10)).unwrap();
        assert!(label_tokens(&half)[1].1);
    }

    #[test]
    fn split_reproduces_worked_example() {
        let gold = ranges_to_offsets(&[span(5, 10), span(17, 30)]);
        let p = Post::new(3, MULTI, gold).unwrap();
        let parts = split_multispan(&p).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].text, "This bitch is so.");
        assert_eq!(parts[0].gold.ranges(), vec![span(5, 10)]);
        assert_eq!(parts[1].text, "This is so fucking idiot.");
        assert_eq!(parts[1].gold.ranges(), vec![span(11, 24)]);
        assert_eq!(
            span_surface(&parts[1].text, span(11, 24)).unwrap(),
            "fucking idiot"
        );
    }

    #[test]
    fn split_single_range_is_identity() {
        let p = Post::new(0, ROW1, SpanSet::from_range(7, 13)).unwrap();
        assert_eq!(split_multispan(&p).unwrap(), vec![p.clone()]);
        let empty = Post::new(0, ROW1, SpanSet::new()).unwrap();
        assert_eq!(split_multispan(&empty).unwrap(), vec![empty.clone()]);
    }

    #[test]
    fn split_absorbs_following_space_at_text_start() {
        // Nothing precedes "ab", so its deletion takes the space after it.
        let p = Post::new(0, "ab cd ef", SpanSet::from_offsets([0, 1, 6, 7])).unwrap();
        let parts = split_multispan(&p).unwrap();
        assert_eq!(parts[0].text, "ab cd");
        assert_eq!(parts[1].text, "cd ef");
        assert_eq!(
            span_surface(&parts[1].text, parts[1].gold.ranges()[0]).unwrap(),
            "ef"
        );
    }

    #[test]
    fn absorbed_spaces_never_overlap() {
        // Both deletions want the single space between them.
        let text = "ab cd";
        let merged = absorb_adjacent_whitespace(text, &[span(0, 2), span(3, 5)]);
        assert_eq!(merged, vec![span(0, 5)]);
    }

    #[test]
    fn delete_example_and_errors() {
        let (d, m) = delete_ranges(MULTI, &[span(16, 30)]).unwrap();
        assert_eq!(d, "This bitch is so.");
        assert_eq!(m.forward()[16], 30);

        let (d, m) = delete_ranges(MULTI, &[]).unwrap();
        assert_eq!(d, MULTI);
        assert_eq!(m, OffsetMap::identity(char_len(MULTI)));

        assert!(matches!(
            delete_ranges(MULTI, &[span(0, 5), span(4, 6)]),
            Err(Error::OverlappingRanges(..))
        ));
        assert!(matches!(
            delete_ranges(MULTI, &[span(30, 40)]),
            Err(Error::RangeOutOfBounds { .. })
        ));
    }

    #[test]
    fn remap_through_deletion() {
        let (d, m) = delete_ranges(MULTI, &[span(4, 10)]).unwrap();
        assert_eq!(d, "This is so fucking idiot.");
        let orig = remap_to_original(&m, &SpanSet::from_range(11, 24)).unwrap();
        assert_eq!(orig, SpanSet::from_range(17, 30));
        assert_eq!(
            remap_to_original(&m, &SpanSet::new()).unwrap(),
            SpanSet::new()
        );
        let id = OffsetMap::identity(5);
        let s = SpanSet::from_offsets([0, 4]);
        assert_eq!(remap_to_original(&id, &s).unwrap(), s);
        assert!(remap_to_original(&id, &SpanSet::from_offsets([5])).is_err());
    }

    #[test]
    fn compose_maps() {
        let (d1, m1) = delete_ranges("abcdef", &[span(1, 2)]).unwrap();
        let (d2, m2) = delete_ranges(&d1, &[span(0, 1)]).unwrap();
        assert_eq!(d2, "cdef");
        assert_eq!(m1.compose(&m2).unwrap().forward(), &[2, 3, 4, 5]);
    }

    #[test]
    fn phrase_matching() {
        let s = match_phrase_offsets("This is so fucking idiot.", &["fucking idiot"]).unwrap();
        assert_eq!(s, SpanSet::from_range(11, 24));
        assert!(match_phrase_offsets::<&str>("anything", &[])
            .unwrap()
            .is_empty());
        let s = match_phrase_offsets("ha ha", &["ha", "ha"]).unwrap();
        assert_eq!(s, SpanSet::from_offsets([0, 1, 3, 4]));
        assert!(matches!(
            match_phrase_offsets("ha ha", &["ha", "ha", "ha"]),
            Err(Error::PhraseNotFound(_))
        ));
    }

    #[test]
    fn lexeme_normalization() {
        assert_eq!(
            normalize_lexeme("Damned,").unwrap(),
            ("damned".into(), span(0, 6))
        );
        assert_eq!(
            normalize_lexeme("\"wall\"").unwrap(),
            ("wall".into(), span(1, 5))
        );
        assert_eq!(normalize_lexeme("Vietnam.>").unwrap().0, "vietnam");
        assert_eq!(normalize_lexeme("dumdum-you").unwrap().0, "dumdum-you");
        assert!(normalize_lexeme("...").is_none());
    }

    #[test]
    fn display_matches_file_format() {
        assert_eq!(SpanSet::from_offsets([9, 7, 8]).to_string(), "[7, 8, 9]");
        assert_eq!(SpanSet::new().to_string(), "[]");
    }
}
