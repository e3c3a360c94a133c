//! Digital Clock Drawing Test analysis: stroke data, synthetic cohorts,
//! feature extraction, the Rouleau scoring baseline and SLIM scoring systems.

pub mod eval;
pub mod features;
pub mod kv;
pub mod pipeline;
pub mod rouleau;
pub mod slim;
pub mod stroke;
pub mod synth;
