//! Shared fixtures for the criterion benchmarks.

use corrsketch::rng::{Rng64, Xoshiro256PlusPlus};
use corrsketch::SamplePair;

/// Pseudo-random pairs over `[1, n]^2`, drawn once so benchmark loops pay
/// no generation cost.
pub fn synthetic_pairs(n: u32, len: usize, seed: u64) -> Vec<SamplePair> {
    let mut rng = Xoshiro256PlusPlus::new(seed);
    (0..len)
        .map(|_| {
            SamplePair::new(
                rng.next_below(n as u64) as u32 + 1,
                rng.next_below(n as u64) as u32 + 1,
            )
        })
        .collect()
}
