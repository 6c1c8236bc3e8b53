//! Exercises the whole config decode path: TOML into the flag-mirroring
//! struct, then the task value into a concrete synthetic task.

#![no_main]

use abstain_cli::config::FileConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = toml::from_str::<FileConfig>(text) else {
        return;
    };
    let _ = cfg.resolve_task(0.1);
});
