//! Seeded generator for toy corpora whose labels follow a fixed lexicon.
//! Used for end-to-end checks where the real task files are unavailable.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Post};
use crate::spans::SpanSet;

pub const TOXIC_WORDS: [&str; 20] = [
    "idiot",
    "moron",
    "stupid",
    "loser",
    "pathetic",
    "scumbag",
    "dumbass",
    "imbecile",
    "jerk",
    "clown",
    "hypocrite",
    "coward",
    "liar",
    "trash",
    "garbage",
    "bigot",
    "crook",
    "fool",
    "ignorant",
    "disgusting",
];

pub const NEUTRAL_WORDS: [&str; 40] = [
    "the",
    "council",
    "voted",
    "on",
    "new",
    "budget",
    "for",
    "roads",
    "and",
    "schools",
    "this",
    "week",
    "people",
    "said",
    "they",
    "would",
    "wait",
    "until",
    "next",
    "year",
    "before",
    "deciding",
    "about",
    "taxes",
    "in",
    "city",
    "mayor",
    "proposal",
    "seems",
    "reasonable",
    "enough",
    "to",
    "most",
    "residents",
    "here",
    "local",
    "paper",
    "reported",
    "that",
    "plan",
];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub posts: usize,
    /// Probability that a post contains any toxic word.
    pub toxic_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            posts: 200,
            toxic_rate: 0.6,
            seed: 0,
        }
    }
}

/// Each post is 6–14 words. In toxic posts, 1–3 of them (possibly
/// repeated positions) are replaced by toxic words, so post length carries
/// no label signal. Gold covers every maximal run of toxic words (with the spaces
/// inside a run) and nothing else. Posts end with a period.
pub fn generate(spec: &SyntheticSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let posts = (0..spec.posts)
        .map(|id| {
            let mut words: Vec<(&str, bool)> = (0..rng.gen_range(6..=14))
                .map(|_| (*NEUTRAL_WORDS.choose(&mut rng).unwrap(), false))
                .collect();
            if rng.gen_bool(spec.toxic_rate) {
                for _ in 0..rng.gen_range(1..=3) {
                    let at = rng.gen_range(0..words.len());
                    words[at] = (*TOXIC_WORDS.choose(&mut rng).unwrap(), true);
                }
            }
            let mut text = String::new();
            let mut gold = Vec::new();
            for (i, (w, toxic)) in words.iter().enumerate() {
                if i > 0 {
                    let prev_toxic = words[i - 1].1;
                    if *toxic && prev_toxic {
                        gold.push(text.chars().count());
                    }
                    text.push(' ');
                }
                let start = text.chars().count();
                text.push_str(w);
                if *toxic {
                    gold.extend(start..start + w.chars().count());
                }
            }
            text.push('.');
            Post {
                id,
                text,
                gold: SpanSet::from_offsets(gold),
            }
        })
        .collect();
    Corpus::new(posts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spans::span_surface;

    #[test]
    fn gold_covers_exactly_the_toxic_runs() {
        let c = generate(&SyntheticSpec {
            posts: 50,
            ..Default::default()
        });
        for p in &c {
            for r in p.gold.ranges() {
                let s = span_surface(&p.text, r).unwrap();
                assert!(s.split(' ').all(|w| TOXIC_WORDS.contains(&w)), "{s:?}");
            }
            let toxic_tokens = p
                .text
                .trim_end_matches('.')
                .split(' ')
                .filter(|w| TOXIC_WORDS.contains(w))
                .count();
            assert_eq!(toxic_tokens == 0, p.gold.is_empty());
        }
    }

    #[test]
    fn deterministic() {
        let s = SyntheticSpec::default();
        assert_eq!(generate(&s), generate(&s));
    }
}
