#![no_main]

use dcdt_core::features::{FeatureCatalog, FeatureSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cat) = FeatureCatalog::parse(text) {
        for d in cat.select(FeatureSet::All) {
            for dep in &d.dependencies {
                assert!(d.u > cat.get(dep).unwrap().u);
            }
        }
    }
});
