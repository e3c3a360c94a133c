#![no_main]

use dcdt_core::features::{fit_ellipse, largest_angular_gap};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let pts: Vec<(f64, f64)> = data
        .chunks_exact(4)
        .map(|c| (i16::from_le_bytes([c[0], c[1]]) as f64 / 64.0, i16::from_le_bytes([c[2], c[3]]) as f64 / 64.0))
        .collect();
    if let Ok(f) = fit_ellipse(&pts) {
        assert!(f.center.0.is_finite() && f.center.1.is_finite());
    }
    let angles: Vec<f64> = pts.iter().map(|p| p.0.rem_euclid(360.0)).collect();
    if let Some(g) = largest_angular_gap(&angles) {
        assert!((0.0..=360.0).contains(&g));
    }
});
