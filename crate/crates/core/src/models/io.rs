//! Versioned JSON documents for trained models.
//!
//! ```json
//! {"format": "toxic-spans/gate", "version": 1, "hash_buckets": 65536,
//!  "bias": -0.3, "weights": [[17, 0.52], ...], "config": {...}}
//! ```
//!
//! Gate weights are stored sparsely as `[bucket, weight]` pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

use super::{GateModel, LexEntry, LexiconModel, TrainConfig};

pub const MODEL_VERSION: u32 = 1;
pub const GATE_FORMAT: &str = "toxic-spans/gate";
pub const LEXICON_FORMAT: &str = "toxic-spans/lexicon";

/// Largest bucket count a document may declare.
const MAX_BUCKETS: usize = 1 << 24;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    format: String,
    version: u32,
    hash_buckets: usize,
    bias: f64,
    weights: Vec<(usize, f64)>,
    config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconDoc {
    format: String,
    version: u32,
    min_count: u64,
    min_ratio: f64,
    entries: BTreeMap<String, LexEntry>,
}

/// Checks `format` and `version` before the body is decoded, so a document
/// from a newer release fails with a version error rather than a schema one.
fn check_header(v: &Value, format: &'static str) -> Result<()> {
    let found = v
        .get("format")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::ModelFormat("missing \"format\"".into()))?;
    if found != format {
        return Err(Error::ModelFormat(format!(
            "expected {format:?}, found {found:?}"
        )));
    }
    let version = v
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::ModelFormat("missing \"version\"".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(Error::UnsupportedVersion {
            kind: format,
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_VERSION,
        });
    }
    Ok(())
}

impl GateModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = GateDoc {
            format: GATE_FORMAT.into(),
            version: MODEL_VERSION,
            hash_buckets: self.hash_buckets,
            bias: self.bias,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i, *w))
                .collect(),
            config: self.config.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(input: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(input)?;
        check_header(&v, GATE_FORMAT)?;
        let doc: GateDoc = serde_json::from_value(v)?;
        if doc.hash_buckets == 0 || doc.hash_buckets > MAX_BUCKETS {
            return Err(Error::ModelFormat(format!(
                "hash_buckets {} outside 1..={MAX_BUCKETS}",
                doc.hash_buckets
            )));
        }
        if !doc.bias.is_finite() {
            return Err(Error::ModelFormat("non-finite bias".into()));
        }
        let mut weights = vec![0.0; doc.hash_buckets];
        for (i, w) in doc.weights {
            if i >= doc.hash_buckets || !w.is_finite() {
                return Err(Error::ModelFormat(format!("bad weight entry [{i}, {w}]")));
            }
            weights[i] = w;
        }
        Ok(GateModel {
            weights,
            bias: doc.bias,
            hash_buckets: doc.hash_buckets,
            config: doc.config,
        })
    }
}

impl LexiconModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = LexiconDoc {
            format: LEXICON_FORMAT.into(),
            version: MODEL_VERSION,
            min_count: self.min_count,
            min_ratio: self.min_ratio,
            entries: self.entries.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(input: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(input)?;
        check_header(&v, LEXICON_FORMAT)?;
        let doc: LexiconDoc = serde_json::from_value(v)?;
        if doc.min_count < 1 || !(doc.min_ratio > 0.0 && doc.min_ratio <= 1.0) {
            return Err(Error::ModelFormat("thresholds out of range".into()));
        }
        if let Some((k, _)) = doc.entries.iter().find(|(_, e)| e.in_span > e.total) {
            return Err(Error::ModelFormat(format!(
                "entry {k:?} has in_span > total"
            )));
        }
        Ok(LexiconModel {
            entries: doc.entries,
            min_count: doc.min_count,
            min_ratio: doc.min_ratio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_round_trip() {
        let mut m = GateModel::zeros(32);
        m.weights[3] = 0.25;
        m.weights[31] = -1.5;
        m.bias = 0.125;
        let back = GateModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn lexicon_round_trip() {
        let m = LexiconModel::from_words(["idiot", "loser"]);
        assert_eq!(LexiconModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn rejects_unknown_version_and_format() {
        let m = LexiconModel::from_words(["idiot"]);
        let doc = m
            .to_json()
            .unwrap()
            .replace("\"version\":1", "\"version\":2");
        assert!(matches!(
            LexiconModel::from_json(&doc),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));
        let gate_doc = GateModel::zeros(4).to_json().unwrap();
        assert!(matches!(
            LexiconModel::from_json(&gate_doc),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn rejects_inconsistent_bodies() {
        let bad_index = r#"{"format":"toxic-spans/gate","version":1,"hash_buckets":4,"bias":0.0,
            "weights":[[4,1.0]],"config":{"epochs":1,"batch_start":4.0,"batch_stop":32.0,
            "batch_factor":1.001,"learning_rate":0.1,"seed":0}}"#;
        assert!(matches!(
            GateModel::from_json(bad_index),
            Err(Error::ModelFormat(_))
        ));
        let bad_counts = r#"{"format":"toxic-spans/lexicon","version":1,"min_count":1,
            "min_ratio":0.5,"entries":{"x":{"in_span":3,"total":2}}}"#;
        assert!(matches!(
            LexiconModel::from_json(bad_counts),
            Err(Error::ModelFormat(_))
        ));
    }
}
