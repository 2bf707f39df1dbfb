//! Shared inputs for the benchmarks.

use qkdrand_core::BitSequence;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` uniformly random bits from a fixed seed.
pub fn random_bits(n: usize, seed: u64) -> BitSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    if !n.is_multiple_of(8) {
        let last = bytes.len() - 1;
        bytes[last] &= 0xffu8 << (8 - n % 8);
    }
    BitSequence::from_packed(bytes, n).expect("length matches buffer")
}
