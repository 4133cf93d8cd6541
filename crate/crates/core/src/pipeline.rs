//! Iterative detection: gate the text, extract one span, cut it out, and ask
//! the gate again about what is left. Spans are reported in the coordinates
//! of the original text.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Prediction};
use crate::error::{Error, Result};
use crate::models::{SpanExtractor, ToxicityGate, DEFAULT_GATE_THRESHOLD};
use crate::spans::{
    absorb_adjacent_whitespace, char_len, delete_ranges, remap_to_original, OffsetMap, SpanSet,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub gate_threshold: f64,
    pub max_iterations: usize,
    /// Also delete one whitespace character next to each extracted span.
    pub absorb_whitespace: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            gate_threshold: DEFAULT_GATE_THRESHOLD,
            max_iterations: 10,
            absorb_whitespace: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gate_threshold) {
            return Err(Error::InvalidConfig(
                "gate_threshold must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GateDeclined,
    NothingExtracted,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub spans: SpanSet,
    /// Number of spans extracted and removed.
    pub iterations: usize,
    pub stop: StopReason,
}

pub fn detect_spans<G, E>(gate: &G, extractor: &E, text: &str, cfg: &PipelineConfig) -> SpanSet
where
    G: ToxicityGate + ?Sized,
    E: SpanExtractor + ?Sized,
{
    detect_spans_traced(gate, extractor, text, cfg).spans
}

pub fn detect_spans_traced<G, E>(
    gate: &G,
    extractor: &E,
    text: &str,
    cfg: &PipelineConfig,
) -> Detection
where
    G: ToxicityGate + ?Sized,
    E: SpanExtractor + ?Sized,
{
    let mut current = text.to_string();
    let mut to_original = OffsetMap::identity(char_len(text));
    let mut found = SpanSet::new();
    let mut iterations = 0;

    let stop = loop {
        if iterations >= cfg.max_iterations.max(1) {
            warn!("span detection stopped after {iterations} iterations");
            break StopReason::IterationLimit;
        }
        if gate.score(&current) < cfg.gate_threshold {
            break StopReason::GateDeclined;
        }
        // Offsets past the end would come from a misbehaving extractor.
        let len = to_original.len();
        let local: SpanSet = extractor
            .extract_one(&current)
            .iter()
            .filter(|&o| o < len)
            .collect();
        if local.is_empty() {
            break StopReason::NothingExtracted;
        }
        let original = match remap_to_original(&to_original, &local) {
            Ok(s) => s,
            Err(e) => {
                warn!("dropping extraction: {e}");
                break StopReason::NothingExtracted;
            }
        };
        found = found.union(&original);
        iterations += 1;

        let mut cut = local.ranges();
        if cfg.absorb_whitespace {
            cut = absorb_adjacent_whitespace(&current, &cut);
        }
        let step = delete_ranges(&current, &cut).and_then(|(derived, map)| {
            let composed = to_original.compose(&map)?;
            Ok((derived, composed))
        });
        match step {
            Ok((derived, map)) => {
                current = derived;
                to_original = map;
            }
            Err(e) => {
                warn!("could not remove extracted span: {e}");
                break StopReason::NothingExtracted;
            }
        }
    };

    Detection {
        spans: found,
        iterations,
        stop,
    }
}

/// [`detect_spans`] over every post, in corpus order. `jobs > 1` fans out
/// over a thread pool; output order is unchanged.
pub fn run_corpus<G, E>(
    gate: &G,
    extractor: &E,
    c: &Corpus,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Vec<Prediction>>
where
    G: ToxicityGate + Sync + ?Sized,
    E: SpanExtractor + Sync + ?Sized,
{
    let one = |p: &crate::corpus::Post| {
        Prediction::new(p.id, detect_spans(gate, extractor, &p.text, cfg))
    };
    if jobs <= 1 {
        return Ok(c.iter().map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| c.posts().par_iter().map(one).collect()))
}
