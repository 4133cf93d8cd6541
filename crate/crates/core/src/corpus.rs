//! Span-annotated corpora: the `spans,text` table format, k-fold splitting,
//! summary statistics, NER export and prediction files.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{jaccard_bin, JACCARD_BINS};
use crate::spans::{char_len, offsets_to_ranges, split_multispan, SpanSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: usize,
    pub text: String,
    pub gold: SpanSet,
}

impl Post {
    /// Checks that every gold offset indexes a character of `text`.
    pub fn new(id: usize, text: impl Into<String>, gold: SpanSet) -> Result<Self> {
        let text = text.into();
        let len = char_len(&text);
        if let Some(max) = gold.max() {
            if max >= len {
                return Err(Error::OffsetOutOfBounds {
                    row: id,
                    offset: max as i64,
                    len,
                });
            }
        }
        Ok(Post { id, text, gold })
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }
}

/// Posts in file order; a post's id is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    posts: Vec<Post>,
}

impl Corpus {
    /// Takes ownership of `posts`, renumbering ids to their positions.
    pub fn new(mut posts: Vec<Post>) -> Self {
        for (i, p) in posts.iter_mut().enumerate() {
            p.id = i;
        }
        Corpus { posts }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Post> {
        self.posts.iter()
    }

    pub fn get(&self, id: usize) -> Option<&Post> {
        self.posts.get(id)
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Every multi-range post replaced by its single-range derivatives.
    pub fn split_multispan(&self) -> Result<Corpus> {
        let mut out = Vec::with_capacity(self.len());
        for p in &self.posts {
            out.extend(split_multispan(p)?);
        }
        Ok(Corpus::new(out))
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Post;
    type IntoIter = std::slice::Iter<'a, Post>;

    fn into_iter(self) -> Self::IntoIter {
        self.posts.iter()
    }
}

/// Parses the body of a bracketed integer list such as `[7, 8, 9]`.
pub(crate) fn parse_offset_list(field: &str) -> std::result::Result<Vec<i64>, String> {
    let inner = field
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("expected a bracketed list, got {:?}", truncate(field)))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<i64>()
                .map_err(|_| format!("non-integer offset {:?}", truncate(tok)))
        })
        .collect()
}

fn truncate(s: &str) -> String {
    const MAX: usize = 40;
    if s.chars().count() <= MAX {
        s.to_string()
    } else {
        format!("{}...", s.chars().take(MAX).collect::<String>())
    }
}

/// Reads a headered `spans,text` table. Column order is taken from the
/// header; extra columns are ignored.
pub fn parse_corpus<R: Read>(input: R) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| Error::MalformedRow {
        row: 0,
        message: e.to_string(),
    })?;
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(Error::MissingColumn(name))
    };
    let (spans_col, text_col) = (col("spans")?, col("text")?);

    let mut posts = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        let text = record.get(text_col).unwrap_or_default().to_string();
        let raw =
            parse_offset_list(record.get(spans_col).unwrap_or_default()).map_err(|message| {
                Error::BadField {
                    row,
                    field: "spans",
                    message,
                }
            })?;
        let len = char_len(&text);
        if let Some(&bad) = raw.iter().find(|&&o| o < 0 || o as u64 >= len as u64) {
            return Err(Error::OffsetOutOfBounds {
                row,
                offset: bad,
                len,
            });
        }
        let gold = SpanSet::from_offsets(raw.into_iter().map(|o| o as usize));
        posts.push(Post {
            id: row,
            text,
            gold,
        });
    }
    Ok(Corpus::new(posts))
}

pub fn parse_corpus_str(input: &str) -> Result<Corpus> {
    parse_corpus(input.as_bytes())
}

/// Writes `c` in the same `spans,text` format [`parse_corpus`] reads.
pub fn write_corpus<W: Write>(c: &Corpus, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["spans", "text"]).map_err(io)?;
    for p in c {
        w.write_record([p.gold.to_string().as_str(), p.text.as_str()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corpus_string(c: &Corpus) -> Result<String> {
    let mut buf = Vec::new();
    write_corpus(c, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Invariant(e.to_string()))
}

/// One cross-validation fold. `*_ids` are ids in the source corpus; the
/// corpora themselves are renumbered from zero.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Corpus,
    pub heldout: Corpus,
    pub train_ids: Vec<usize>,
    pub heldout_ids: Vec<usize>,
}

/// Seeded shuffle, then `k` folds whose sizes differ by at most one.
pub fn kfold_split(c: &Corpus, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let n = c.len();
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, records: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for i in 0..k {
        bounds.push(bounds[i] + base + usize::from(i < extra));
    }

    let pick = |ids: &[usize]| Corpus::new(ids.iter().map(|&i| c.posts[i].clone()).collect());
    Ok((0..k)
        .map(|i| {
            let heldout_ids = order[bounds[i]..bounds[i + 1]].to_vec();
            let train_ids: Vec<usize> = order[..bounds[i]]
                .iter()
                .chain(&order[bounds[i + 1]..])
                .copied()
                .collect();
            Fold {
                train: pick(&train_ids),
                heldout: pick(&heldout_ids),
                train_ids,
                heldout_ids,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub record_count: usize,
    /// Number of contiguous gold ranges → number of posts.
    pub span_count_histogram: BTreeMap<usize, usize>,
    pub zero_span_fraction: f64,
    pub single_span_fraction: f64,
    /// Toxic-fraction histogram; bin `i` covers `[i/20, (i+1)/20)`, the last
    /// bin also takes 1.0.
    pub jaccard_histogram: Vec<usize>,
}

pub fn corpus_stats(c: &Corpus) -> StatsReport {
    let mut span_count_histogram = BTreeMap::new();
    let mut jaccard_histogram = vec![0; JACCARD_BINS];
    for p in c {
        *span_count_histogram
            .entry(offsets_to_ranges(&p.gold).len())
            .or_insert(0) += 1;
        // Empty texts carry no gold and land in the first bin.
        jaccard_histogram[jaccard_bin(p.gold.len(), p.char_len())] += 1;
    }
    let n = c.len();
    let fraction = |k: usize| {
        if n == 0 {
            0.0
        } else {
            span_count_histogram.get(&k).copied().unwrap_or(0) as f64 / n as f64
        }
    };
    StatsReport {
        record_count: n,
        zero_span_fraction: fraction(0),
        single_span_fraction: fraction(1),
        span_count_histogram,
        jaccard_histogram,
    }
}

pub const NER_LABEL: &str = "TOXIC";

/// One training record: entities are `(start, end_exclusive, label)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerRecord {
    pub text: String,
    pub entities: Vec<(usize, usize, String)>,
}

pub fn export_ner(c: &Corpus) -> Vec<NerRecord> {
    c.iter()
        .map(|p| NerRecord {
            text: p.text.clone(),
            entities: offsets_to_ranges(&p.gold)
                .into_iter()
                .map(|r| (r.start, r.end, NER_LABEL.to_string()))
                .collect(),
        })
        .collect()
}

/// JSON-lines, one record per post.
pub fn write_ner_jsonl<W: Write>(records: &[NerRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: usize,
    pub spans: SpanSet,
}

impl Prediction {
    pub fn new(id: usize, spans: SpanSet) -> Self {
        Prediction { id, spans }
    }
}

/// `id\t[o1, o2, ...]` per line.
pub fn write_predictions(preds: &[Prediction]) -> Result<String> {
    let mut seen = HashSet::with_capacity(preds.len());
    let mut out = String::new();
    for p in preds {
        if !seen.insert(p.id) {
            return Err(Error::DuplicateId(p.id));
        }
        out.push_str(&format!("{}\t{}\n", p.id, p.spans));
    }
    Ok(out)
}

/// Inverse of [`write_predictions`]. Blank lines are skipped.
pub fn read_predictions(input: &str) -> Result<Vec<Prediction>> {
    let mut seen = HashSet::new();
    let mut preds = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::BadPrediction {
            line: line_no,
            message,
        };
        let (id, list) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected `id<TAB>[offsets]`".into()))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad id {:?}", truncate(id))))?;
        let offsets = parse_offset_list(list).map_err(&bad)?;
        if let Some(neg) = offsets.iter().find(|&&o| o < 0) {
            return Err(bad(format!("negative offset {neg}")));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        preds.push(Prediction::new(
            id,
            SpanSet::from_offsets(offsets.into_iter().map(|o| o as usize)),
        ));
    }
    Ok(preds)
}
