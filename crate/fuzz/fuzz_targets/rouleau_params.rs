#![no_main]

use dcdt_core::rouleau::RouleauParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = RouleauParams::parse(text) {
        assert_eq!(RouleauParams::parse(&p.to_kv()).expect("written params parse"), p);
    }
});
