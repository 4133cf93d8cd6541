#![no_main]

use libfuzzer_sys::fuzz_target;
use toxic_spans::models::{LexiconModel, SpanExtractor};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(m) = LexiconModel::from_json(s) else {
        return;
    };
    let _ = m.extract_all("an idiot wrote this");
    let again =
        LexiconModel::from_json(&m.to_json().expect("model serializes")).expect("round trip");
    assert_eq!(again, m);
});
