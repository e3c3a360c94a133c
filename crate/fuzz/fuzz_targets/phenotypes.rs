#![no_main]

use dcdt_core::synth::parse_phenotypes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_phenotypes(text);
    }
});
