//! Seed derivation for replica and channel random streams.
//!
//! Every replica of an experiment gets its own 64-bit seed computed as
//! `replica_seed(master, index)`. Inside a replica each Poisson channel of the
//! Harris construction owns a ChaCha8 stream keyed by that seed with
//! `set_stream(channel_index)`, so the marks of one channel never depend on how
//! many draws another channel made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replica `index` under `master`.
///
/// `mix64(master + (index + 1) * GOLDEN_GAMMA)`, i.e. the `index + 1`-th output of a
/// SplitMix64 generator started at `master`.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed for a named sub-experiment, so that different experiment kinds run
/// from one master seed do not share replica streams.
pub fn labelled_seed(master: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(mix64(master ^ 0x6c62_272e_07bb_0142), |acc, b| {
            mix64(acc ^ u64::from(b))
        })
}

/// The random stream for channel `channel` of the construction seeded with `seed`.
pub fn channel_rng(seed: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel);
    rng
}

/// A general-purpose generator for auxiliary draws (initial conditions, synthetic data).
pub fn aux_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}
