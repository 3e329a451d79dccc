//! Stable seed derivation for independent RNG streams.
//!
//! Every randomized component derives its stream from `(base seed, tag,
//! indices)` through SplitMix64 so that experiments decompose into
//! reproducible, order-independent pieces.

/// SplitMix64 mixing step.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed, a component tag, and two indices.
pub fn derive_seed(base: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut s = splitmix(base);
    s = splitmix(s ^ tag);
    s = splitmix(s ^ a);
    splitmix(s ^ b)
}
