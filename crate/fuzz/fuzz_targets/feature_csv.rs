#![no_main]

use dcdt_core::features::FeatureTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = FeatureTable::parse_csv(text) {
        let back = FeatureTable::parse_csv(&t.to_csv()).expect("written table parses");
        assert_eq!(back.names, t.names);
        assert_eq!(back.subjects, t.subjects);
    }
});
