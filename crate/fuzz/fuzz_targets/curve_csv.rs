//! Exporting parsed rows is a normal form: export, re-parse and re-export
//! must be a fixed point, whatever shape the accepted input had.

#![no_main]

use abstain_core::curve::{export_curve, parse_curve_str};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_curve_str(text) else {
        return;
    };
    let mut first = Vec::new();
    export_curve(&rows, &mut first).expect("exporting parsed rows");
    let reparsed = parse_curve_str(std::str::from_utf8(&first).unwrap())
        .expect("re-parsing our own export");
    let mut second = Vec::new();
    export_curve(&reparsed, &mut second).expect("re-exporting");
    assert_eq!(first, second, "export is not a fixed point");
});
