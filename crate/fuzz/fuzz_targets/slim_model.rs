#![no_main]

use dcdt_core::slim::SlimModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = SlimModel::parse(text) {
        let back = SlimModel::parse(&m.to_text()).expect("written model parses");
        assert_eq!(back.intercept, m.intercept);
        assert_eq!(back.nonzero(), m.nonzero());
    }
});
