#![no_main]

use dcdt_core::features::FeatureCatalog;
use dcdt_core::slim::{parse_sheet, render};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let cat = FeatureCatalog::builtin();
    if let Ok(m) = parse_sheet(text, &cat) {
        // A parsed sheet renders, and the rendering parses to the same model.
        if let Ok(sheet) = render(&m, &cat) {
            let back = parse_sheet(&sheet, &cat).expect("rendered sheet parses");
            assert_eq!(back.intercept, m.intercept);
        }
    }
});
