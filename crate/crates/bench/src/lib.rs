//! Fixtures shared by the benchmarks.

use laguerre_core::scenario::generate;
use laguerre_core::{Frame, FrameRole, ScenarioConfig};

/// Deterministic pseudo-noise in `[-1, 1)` from a 64-bit LCG.
pub fn signal(len: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

pub fn noise_frame(width: usize, height: usize, seed: u64) -> Frame {
    Frame::new(width, height, 0, FrameRole::Raw, signal(width * height, seed)).expect("shape matches")
}

/// Frames of the default scenario at the given size, target centred.
pub fn scenario_frames(size: usize, frames: usize) -> Vec<Frame> {
    let cfg = ScenarioConfig {
        width: size,
        height: size,
        frames,
        final_position: [size as f64 / 2.0; 2],
        ..ScenarioConfig::default()
    };
    generate(&cfg).expect("valid scenario").0
}
