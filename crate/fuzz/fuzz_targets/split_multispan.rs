#![no_main]

use libfuzzer_sys::fuzz_target;
use toxic_spans::spans::{char_len, split_multispan};
use toxic_spans::{Post, SpanSet};

fuzz_target!(|input: (String, Vec<u16>)| {
    let (text, raw) = input;
    let n = char_len(&text);
    if n == 0 {
        return;
    }
    let gold = SpanSet::from_offsets(raw.into_iter().map(|o| usize::from(o) % n));
    let post = Post::new(0, text, gold).expect("offsets are in bounds");
    for derived in split_multispan(&post).expect("valid post splits") {
        assert!(derived.gold.ranges().len() <= 1);
        assert!(derived.gold.max().map_or(true, |m| m < derived.char_len()));
    }
});
