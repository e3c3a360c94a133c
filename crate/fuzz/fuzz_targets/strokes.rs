#![no_main]

use dcdt_core::stroke::{parse_strokes, write_strokes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tests) = parse_strokes(text) {
        // Writing quantizes once; after that the text is a fixed point.
        let once = write_strokes(&tests);
        let again = parse_strokes(&once).expect("written strokes parse");
        assert_eq!(write_strokes(&again), once);
    }
});
