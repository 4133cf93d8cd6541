#![no_main]

use libfuzzer_sys::fuzz_target;
use toxic_spans::corpus::{read_predictions, write_predictions};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(preds) = read_predictions(s) else {
        return;
    };
    let written = write_predictions(&preds).expect("ids are unique");
    assert_eq!(
        read_predictions(&written).expect("written predictions parse"),
        preds
    );
});
