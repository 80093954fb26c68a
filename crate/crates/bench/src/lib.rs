//! Shared fixtures for the criterion benches.

use classify_core::{prepare_dataset, OrderedDataset};

/// Deterministic pseudo-random dataset of `n` points drawn from three clumps.
pub fn clumped(n: usize) -> OrderedDataset {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let jitter = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            [0.0, 4.0, 9.0][i % 3] + jitter
        })
        .collect();
    prepare_dataset(&raw).expect("finite, non-empty")
}
