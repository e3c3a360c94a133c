#![no_main]

use dcdt_core::kv::{parse_kv, parse_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(map) = parse_kv(text) {
        for (k, v) in &map {
            let _ = parse_list::<f64>(k, v);
        }
    }
});
