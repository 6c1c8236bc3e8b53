//! First input byte selects the bare-title policy, the rest is JSONL text.

#![no_main]

use abstain_core::dataset::{read_jsonl_str, TitlePolicy};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let policy = if sel & 1 == 0 {
        TitlePolicy::Correct
    } else {
        TitlePolicy::Incorrect
    };
    let _ = read_jsonl_str(text, policy);
});
