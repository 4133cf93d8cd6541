use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_start: f64,
    pub batch_stop: f64,
    /// Multiplier applied to the batch size after every batch.
    pub batch_factor: f64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 45,
            batch_start: 4.0,
            batch_stop: 32.0,
            batch_factor: 1.001,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.batch_start >= 1.0) {
            return bad("batch_start must be >= 1");
        }
        if !(self.batch_factor > 1.0) {
            return bad("batch_factor must be > 1");
        }
        if !(self.batch_stop >= self.batch_start) || !self.batch_stop.is_finite() {
            return bad("batch_stop must be finite and >= batch_start");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// The real-valued compounding sequence `start, start·f, start·f², …`
/// clamped at `stop`. Infinite.
pub fn compounding(start: f64, stop: f64, factor: f64) -> impl Iterator<Item = f64> {
    std::iter::successors(Some(start), move |&b| Some((b * factor).min(stop)))
}

/// Shuffles `0..n_items` with `seed` and cuts it into batches of
/// `floor(b)` items, `b` following [`compounding`]. The last batch takes
/// whatever is left.
pub fn compounding_batches(cfg: &TrainConfig, n_items: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n_items).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut sizes = compounding(cfg.batch_start, cfg.batch_stop, cfg.batch_factor);
    let mut batches = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let b = sizes.next().unwrap_or(cfg.batch_stop);
        let take = (b.floor() as usize).clamp(1, rest.len());
        let (head, tail) = rest.split_at(take);
        batches.push(head.to_vec());
        rest = tail;
    }
    batches
}

/// How many multiplications leave `b` strictly below `stop`; the next one
/// clamps it to `stop`.
pub fn multiplications_below_cap(cfg: &TrainConfig) -> usize {
    compounding(cfg.batch_start, cfg.batch_stop, cfg.batch_factor)
        .skip(1)
        .take_while(|&b| b < cfg.batch_stop)
        .count()
}
