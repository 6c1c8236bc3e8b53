//! Any rejector the decoder accepts must re-encode and decode back to the
//! same parameter bits: the decoder validates finiteness, so the wire form
//! has no lossy values.

#![no_main]

use abstain_core::models::{from_json, to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rejector) = from_json(text) else {
        return;
    };
    let encoded = to_json(&rejector);
    let again = from_json(&encoded).expect("re-decoding our own encoding");
    let a: Vec<u64> = rejector.params_flat().iter().map(|v| v.to_bits()).collect();
    let b: Vec<u64> = again.params_flat().iter().map(|v| v.to_bits()).collect();
    assert_eq!(a, b, "round trip changed parameter bits");
});
