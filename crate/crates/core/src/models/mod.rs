//! Stand-in models behind two small traits: a post-level [`ToxicityGate`]
//! and a [`SpanExtractor`]. Anything implementing them can drive the
//! detection pipeline.

mod gate;
mod io;
mod lexicon;
mod schedule;

pub use gate::{
    featurize, log_loss, log_loss_gradient, train_gate, train_gate_with, Features, GateExample,
    GateGradient, GateModel, DEFAULT_HASH_BUCKETS,
};
pub use io::{GATE_FORMAT, LEXICON_FORMAT, MODEL_VERSION};
pub use lexicon::{train_lexicon, LexEntry, LexiconModel};
pub use schedule::{compounding, compounding_batches, multiplications_below_cap, TrainConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spans::{char_len, SpanSet};

pub const DEFAULT_GATE_THRESHOLD: f64 = 0.5;

/// Post-level toxicity probability in `[0, 1]`.
pub trait ToxicityGate {
    fn score(&self, text: &str) -> f64;
}

impl<F: Fn(&str) -> f64> ToxicityGate for F {
    fn score(&self, text: &str) -> f64 {
        self(text)
    }
}

pub trait SpanExtractor {
    /// All toxic offsets at once.
    fn extract_all(&self, text: &str) -> SpanSet;
    /// A single contiguous span, or nothing.
    fn extract_one(&self, text: &str) -> SpanSet;
}

/// Fires (score 1) iff the lexicon finds anything in the text.
#[derive(Debug, Clone, Copy)]
pub struct LexiconGate<'a>(pub &'a LexiconModel);

impl ToxicityGate for LexiconGate<'_> {
    fn score(&self, text: &str) -> f64 {
        if self.0.extract_all(text).is_empty() {
            0.0
        } else {
            1.0
        }
    }
}

pub fn gate_score<G: ToxicityGate + ?Sized>(gate: &G, text: &str) -> f64 {
    gate.score(text)
}

/// Includes each character independently with probability `p`.
pub fn random_baseline(p: f64, seed: u64, text: &str) -> Result<SpanSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..char_len(text)).filter(|_| rng.gen_bool(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_extremes_and_determinism() {
        let text = "Pretty damned eloquent ... :)";
        assert!(random_baseline(0.0, 1, text).unwrap().is_empty());
        assert_eq!(
            random_baseline(1.0, 1, text).unwrap(),
            SpanSet::from_range(0, 29)
        );
        assert_eq!(
            random_baseline(0.1, 5, text).unwrap(),
            random_baseline(0.1, 5, text).unwrap()
        );
        assert!(random_baseline(1.5, 0, text).is_err());
    }

    #[test]
    fn lexicon_gate_fires_on_active_words() {
        let lex = LexiconModel::from_words(["idiot"]);
        let g = LexiconGate(&lex);
        assert_eq!(gate_score(&g, "what an idiot."), 1.0);
        assert_eq!(gate_score(&g, "what a day."), 0.0);
    }
}
