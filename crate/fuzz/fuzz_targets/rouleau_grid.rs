#![no_main]

use dcdt_core::rouleau::RouleauGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = RouleauGrid::parse(text) {
        // Enumerating a huge grid is not the point here.
        if text.len() < 512 {
            let _ = g.points().into_iter().take(10_000).count();
        }
    }
});
