//! Deterministic per-layer stream derivation.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// The generator behind every sampling stream.
pub type StreamRng = Xoshiro256PlusPlus;

const REPLICATE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const LAYER_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const ATTRIBUTE_TAG: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of layer `layer` in replicate `replicate`.
pub fn layer_seed(master_seed: u64, replicate: u64, layer: u64) -> u64 {
    let rep = mix64(mix64(master_seed) ^ replicate.wrapping_mul(REPLICATE_SALT).wrapping_add(1));
    mix64(rep ^ layer.wrapping_mul(LAYER_SALT).wrapping_add(2))
}

/// Stream for the edges (and vertex subset) of one layer.
pub fn edge_stream(master_seed: u64, replicate: u64, layer: u64) -> StreamRng {
    StreamRng::seed_from_u64(layer_seed(master_seed, replicate, layer))
}

/// Stream for the `(x, q)` draw of one layer, disjoint from [`edge_stream`].
pub fn attribute_stream(master_seed: u64, replicate: u64, layer: u64) -> StreamRng {
    StreamRng::seed_from_u64(mix64(layer_seed(master_seed, replicate, layer) ^ ATTRIBUTE_TAG))
}
