//! Seed derivation.
//!
//! Trial `i` of a sweep with master seed `m` uses the `(i+1)`-th output of a
//! SplitMix64 generator started at `m`. Each trial splits its seed the same
//! way into three streams: output 1 drives data generation, output 2 the
//! initialization and output 3 the K-subspaces loop. Every stream is a
//! `ChaCha8Rng` seeded with `seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `index`-th output (zero-based) of SplitMix64 seeded with `seed`.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    mix(seed.wrapping_add(GAMMA.wrapping_mul(index.wrapping_add(1))))
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    splitmix64(master, trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Data,
    Init,
    Kss,
}

pub fn stream_rng(trial_seed: u64, stream: Stream) -> ChaCha8Rng {
    let idx = match stream {
        Stream::Data => 0,
        Stream::Init => 1,
        Stream::Kss => 2,
    };
    ChaCha8Rng::seed_from_u64(splitmix64(trial_seed, idx))
}
