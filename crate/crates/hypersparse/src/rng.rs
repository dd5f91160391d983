//! Counter-based randomness: every random decision is a pure function of
//! (seed, domain tag, index), so results do not depend on iteration order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_KEEP_IMPORTANCE: u64 = 0x01;
pub const TAG_KEEP_ORDINARY: u64 = 0x02;
pub const TAG_KEEP_UNIFORM: u64 = 0x03;
pub const TAG_SURROGATE: u64 = 0x04;
pub const TAG_SIZE_CLASS: u64 = 0x05;
pub const TAG_FAST_STAGE: u64 = 0x06;
pub const TAG_COMPONENT: u64 = 0x07;
pub const TAG_GENERATE: u64 = 0x08;
pub const TAG_PROBE: u64 = 0x09;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit value for (seed, tag, index).
pub fn mix(seed: u64, tag: u64, index: u64) -> u64 {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ tag.wrapping_mul(0xd134_2543_de82_ef95);
    let b = splitmix64(&mut state);
    let mut state = b ^ index.wrapping_mul(0x2545_f491_4f6c_dd1d);
    splitmix64(&mut state)
}

/// Maps 64 random bits to a uniform value in [0, 1).
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One uniform draw in [0, 1) for the given counter coordinates.
pub fn uniform(seed: u64, tag: u64, index: u64) -> f64 {
    unit_f64(mix(seed, tag, index))
}

/// A full RNG stream for multi-draw contexts (generators, probe vectors).
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tag, index))
}
