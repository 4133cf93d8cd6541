#![no_main]

use libfuzzer_sys::fuzz_target;
use toxic_spans::models::{GateModel, ToxicityGate};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(m) = GateModel::from_json(s) else {
        return;
    };
    let score = m.score("some text");
    assert!((0.0..=1.0).contains(&score));
    let again = GateModel::from_json(&m.to_json().expect("model serializes")).expect("round trip");
    assert_eq!(again, m);
});
