//! Post-level toxicity classifier: logistic regression over hashed
//! character 1/2/3-grams, trained with minibatch SGD on the compounding
//! batch schedule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::spans::split_multispan;

use super::schedule::{compounding_batches, TrainConfig};
use super::ToxicityGate;

pub const DEFAULT_HASH_BUCKETS: usize = 1 << 16;
const NGRAM_ORDERS: [usize; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hash_buckets: usize,
    pub config: TrainConfig,
}

/// Sparse feature vector, sorted by bucket.
pub type Features = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct GateExample {
    pub features: Features,
    /// 1.0 for toxic, 0.0 otherwise.
    pub label: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateGradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// L2-normalized counts of the lowercased character n-grams of `text`.
pub fn featurize(text: &str, hash_buckets: usize) -> Features {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut buf = [0u8; 4];
    for n in NGRAM_ORDERS {
        for gram in chars.windows(n) {
            let bytes = gram
                .iter()
                .flat_map(|c| c.encode_utf8(&mut buf).as_bytes().to_vec())
                .collect::<Vec<u8>>();
            let h = fnv1a(std::iter::once(n as u8).chain(bytes));
            *counts
                .entry((h % hash_buckets as u64) as usize)
                .or_insert(0.0) += 1.0;
        }
    }
    let norm = counts.values().map(|v| v * v).sum::<f64>().sqrt();
    counts.into_iter().map(|(j, v)| (j, v / norm)).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl GateModel {
    pub fn zeros(hash_buckets: usize) -> Self {
        GateModel {
            weights: vec![0.0; hash_buckets],
            bias: 0.0,
            hash_buckets,
            config: TrainConfig::default(),
        }
    }

    pub fn logit(&self, features: &Features) -> f64 {
        self.bias
            + features
                .iter()
                .map(|&(j, v)| self.weights[j] * v)
                .sum::<f64>()
    }

    pub fn example(&self, text: &str, toxic: bool) -> GateExample {
        GateExample {
            features: featurize(text, self.hash_buckets),
            label: if toxic { 1.0 } else { 0.0 },
        }
    }
}

impl ToxicityGate for GateModel {
    fn score(&self, text: &str) -> f64 {
        sigmoid(self.logit(&featurize(text, self.hash_buckets)))
    }
}

/// Mean log-loss over `examples`.
pub fn log_loss(model: &GateModel, examples: &[GateExample]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    examples
        .iter()
        .map(|ex| {
            let z = model.logit(&ex.features);
            softplus(z) - ex.label * z
        })
        .sum::<f64>()
        / examples.len() as f64
}

/// Analytic gradient of [`log_loss`].
pub fn log_loss_gradient(model: &GateModel, examples: &[GateExample]) -> GateGradient {
    let mut grad = GateGradient {
        weights: vec![0.0; model.hash_buckets],
        bias: 0.0,
    };
    if examples.is_empty() {
        return grad;
    }
    let scale = 1.0 / examples.len() as f64;
    for ex in examples {
        let r = (sigmoid(model.logit(&ex.features)) - ex.label) * scale;
        grad.bias += r;
        for &(j, v) in &ex.features {
            grad.weights[j] += r * v;
        }
    }
    grad
}

/// One gradient step on a minibatch. Residuals are all taken at the
/// pre-step weights.
fn sgd_step(model: &mut GateModel, batch: &[&GateExample], lr: f64) {
    let scale = lr / batch.len() as f64;
    let residuals: Vec<f64> = batch
        .iter()
        .map(|ex| sigmoid(model.logit(&ex.features)) - ex.label)
        .collect();
    for (ex, r) in batch.iter().zip(residuals) {
        model.bias -= scale * r;
        for &(j, v) in &ex.features {
            model.weights[j] -= scale * r * v;
        }
    }
}

/// Post label is 1 iff the post has gold spans. Besides the posts
/// themselves, the gate also trains on the single-span posts derived from
/// every multi-span post ([`split_multispan`]): these are the
/// partially cleaned texts the pipeline rechecks after each removal.
pub fn train_gate(c: &Corpus, cfg: &TrainConfig) -> Result<GateModel> {
    train_gate_with(c, cfg, DEFAULT_HASH_BUCKETS, |_, _| {})
}

/// As [`train_gate`], calling `on_epoch(epoch, loss)` with the full-data
/// loss after every epoch.
pub fn train_gate_with(
    c: &Corpus,
    cfg: &TrainConfig,
    hash_buckets: usize,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<GateModel> {
    cfg.validate()?;
    if hash_buckets == 0 {
        return Err(Error::InvalidConfig("hash_buckets must be >= 1".into()));
    }
    if c.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let toxic = c.iter().filter(|p| !p.gold.is_empty()).count();
    if toxic == 0 || toxic == c.len() {
        return Err(Error::SingleClass);
    }

    let mut model = GateModel::zeros(hash_buckets);
    model.config = cfg.clone();
    let mut examples: Vec<GateExample> = c
        .iter()
        .map(|p| model.example(&p.text, !p.gold.is_empty()))
        .collect();
    for p in c.iter().filter(|p| p.gold.ranges().len() > 1) {
        for derived in split_multispan(p)? {
            examples.push(model.example(&derived.text, true));
        }
    }

    for epoch in 0..cfg.epochs {
        let seed = cfg
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(epoch as u64);
        for batch in compounding_batches(cfg, examples.len(), seed) {
            let refs: Vec<&GateExample> = batch.iter().map(|&i| &examples[i]).collect();
            sgd_step(&mut model, &refs, cfg.learning_rate);
        }
        on_epoch(epoch, log_loss(&model, &examples));
    }
    if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Invariant(
            "gate training produced non-finite weights".into(),
        ));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Post;
    use crate::spans::SpanSet;

    fn toy_corpus() -> Corpus {
        let fillers = [
            "the weather",
            "a long day",
            "coffee time",
            "see you soon",
            "nice photo",
            "read the news",
            "walk the dog",
            "good point",
            "fair enough",
            "well said",
        ];
        let mut posts = Vec::new();
        for f in fillers {
            let text = format!("{f} zzz");
            let n = text.chars().count();
            posts.push(Post::new(0, text, SpanSet::from_range(n - 3, n)).unwrap());
            posts.push(Post::new(0, f, SpanSet::new()).unwrap());
        }
        Corpus::new(posts)
    }

    #[test]
    fn zero_model_scores_half() {
        let m = GateModel::zeros(64);
        assert_eq!(m.score("anything at all"), 0.5);
        assert_eq!(m.score(""), 0.5);
    }

    #[test]
    fn features_are_normalized_bags() {
        let f = featurize("abcabc", 1024);
        let norm: f64 = f.iter().map(|(_, v)| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(featurize("", 16).is_empty());
        // Same multiset of n-grams, different order of occurrence.
        assert_eq!(featurize("ab ab", 1 << 20), featurize("ab ab", 1 << 20));
    }

    #[test]
    fn separable_toy_corpus() {
        let c = toy_corpus();
        let cfg = TrainConfig::default();
        let m = train_gate(&c, &cfg).unwrap();
        assert!(m.score("some other words zzz") > 0.5);
        assert!(m.score("zzz zzz") > 0.5);
        assert!(m.score("the weather") < 0.5);
    }

    #[test]
    fn training_is_deterministic() {
        let c = toy_corpus();
        let cfg = TrainConfig {
            epochs: 5,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(train_gate(&c, &cfg).unwrap(), train_gate(&c, &cfg).unwrap());
    }

    #[test]
    fn loss_decreases_over_epochs() {
        let mut losses = Vec::new();
        train_gate_with(&toy_corpus(), &TrainConfig::default(), 1 << 12, |_, l| {
            losses.push(l)
        })
        .unwrap();
        assert_eq!(losses.len(), 45);
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_rejected() {
        let c = Corpus::new(vec![Post::new(0, "x", SpanSet::new()).unwrap()]);
        assert!(matches!(
            train_gate(&c, &TrainConfig::default()),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            train_gate(&Corpus::default(), &TrainConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn stable_at_extreme_logits() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((softplus(1000.0) - 1000.0).abs() < 1e-9);
        assert!(softplus(-1000.0) >= 0.0);
    }
}
