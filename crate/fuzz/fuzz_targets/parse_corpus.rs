#![no_main]

use libfuzzer_sys::fuzz_target;
use toxic_spans::corpus::{parse_corpus, parse_corpus_str, write_corpus_string};

fuzz_target!(|data: &[u8]| {
    let Ok(c) = parse_corpus(data) else { return };
    for p in &c {
        assert!(p.gold.max().map_or(true, |m| m < p.char_len()));
    }
    let written = write_corpus_string(&c).expect("parsed corpus writes");
    assert_eq!(
        parse_corpus_str(&written).expect("written corpus parses"),
        c
    );
});
