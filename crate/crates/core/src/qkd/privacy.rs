//! Privacy amplification by Toeplitz hashing over GF(2).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::QkdError;
use crate::bitstream::{BitBuilder, BitSequence};

/// Inputs to the output-length rule `L - M - s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaParams {
    /// Reconciled key length.
    pub l: usize,
    /// Bits assumed known to an eavesdropper.
    pub m: usize,
    /// Security parameter.
    pub s: usize,
}

impl PaParams {
    pub fn output_len(&self) -> Result<usize, QkdError> {
        self.l
            .checked_sub(self.m)
            .and_then(|v| v.checked_sub(self.s))
            .filter(|&v| v >= 1)
            .ok_or(QkdError::NonPositiveOutputLength { l: self.l, m: self.m, s: self.s })
    }
}

/// Shrinks `key` to exactly `L - M - s` bits with a seeded random Toeplitz
/// matrix. Both parties using the same seed obtain the same output.
pub fn privacy_amplify(key: &BitSequence, params: PaParams, seed: u64) -> Result<BitSequence, QkdError> {
    if params.l != key.len() {
        return Err(QkdError::LengthMismatch(format!("PA params say L = {} but key has {} bits", params.l, key.len())));
    }
    let out_len = params.output_len()?;
    Ok(toeplitz_hash(key, out_len, seed))
}

/// The `out_len + L - 1` bits defining the Toeplitz matrix: entry `(i, j)`
/// equals bit `i - j + L - 1`.
pub fn toeplitz_diagonals(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // two spare limbs so windowed reads never go out of bounds
    let mut limbs = vec![0u64; count.div_ceil(64) + 2];
    for limb in limbs.iter_mut().take(count.div_ceil(64)) {
        *limb = rng.next_u64();
    }
    if !count.is_multiple_of(64) {
        limbs[count / 64] &= (1u64 << (count % 64)) - 1;
    }
    limbs
}

/// `T · key` over GF(2) for the `out_len × L` Toeplitz matrix `T` drawn
/// from `seed`.
pub fn toeplitz_hash(key: &BitSequence, out_len: usize, seed: u64) -> BitSequence {
    let len = key.len();
    if out_len == 0 {
        return BitSequence::new();
    }
    if len == 0 {
        return BitSequence::zeros(out_len);
    }
    let diag = toeplitz_diagonals(seed, out_len + len - 1);
    // y_i = XOR_t diag[i + t] & key[L - 1 - t]
    let reversed = key.reversed().to_limbs();
    let mut out = BitBuilder::with_capacity(out_len);
    for i in 0..out_len {
        let (q, s) = (i / 64, i % 64);
        let mut acc = 0u64;
        for (w, &k) in reversed.iter().enumerate() {
            let lo = diag[q + w] >> s;
            let hi = if s == 0 { 0 } else { diag[q + w + 1] << (64 - s) };
            acc ^= (lo | hi) & k;
        }
        out.push(acc.count_ones() & 1 == 1);
    }
    out.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn diagonal_bit(limbs: &[u64], index: usize) -> bool {
        (limbs[index / 64] >> (index % 64)) & 1 == 1
    }

    fn naive_hash(key: &BitSequence, out_len: usize, seed: u64) -> BitSequence {
        let l = key.len();
        let diag = toeplitz_diagonals(seed, out_len + l - 1);
        (0..out_len)
            .map(|i| {
                let mut acc = false;
                for j in 0..l {
                    acc ^= diagonal_bit(&diag, i + l - 1 - j) & key.get(j);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn output_length_rule() {
        let key = BitSequence::zeros(10);
        let out = privacy_amplify(&key, PaParams { l: 10, m: 3, s: 2 }, 1).unwrap();
        assert_eq!(out.len(), 5);
        assert!(matches!(
            privacy_amplify(&key, PaParams { l: 10, m: 9, s: 1 }, 1),
            Err(QkdError::NonPositiveOutputLength { l: 10, m: 9, s: 1 })
        ));
        assert!(privacy_amplify(&key, PaParams { l: 10, m: 12, s: 0 }, 1).is_err());
        assert!(matches!(privacy_amplify(&key, PaParams { l: 11, m: 1, s: 1 }, 1), Err(QkdError::LengthMismatch(_))));
    }

    #[test]
    fn zero_key_hashes_to_zero() {
        for seed in 0..5 {
            let out = privacy_amplify(&BitSequence::zeros(300), PaParams { l: 300, m: 50, s: 10 }, seed).unwrap();
            assert_eq!(out.ones_count(), 0);
            assert_eq!(out.len(), 240);
        }
    }

    #[test]
    fn matches_explicit_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &(l, out) in &[(1, 1), (5, 3), (64, 10), (65, 64), (200, 130), (1000, 1)] {
            let key: BitSequence = (0..l).map(|_| rng.random::<bool>()).collect();
            assert_eq!(toeplitz_hash(&key, out, 42), naive_hash(&key, out, 42), "l={l} out={out}");
        }
    }

    #[test]
    fn same_seed_same_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key: BitSequence = (0..4_000).map(|_| rng.random::<bool>()).collect();
        let p = PaParams { l: 4_000, m: 1_000, s: 64 };
        assert_eq!(privacy_amplify(&key, p, 5).unwrap(), privacy_amplify(&key, p, 5).unwrap());
        assert_ne!(privacy_amplify(&key, p, 5).unwrap(), privacy_amplify(&key, p, 6).unwrap());
    }

    proptest! {
        #[test]
        fn linear_over_gf2(a in proptest::collection::vec(any::<bool>(), 1..300), b_seed in any::<u64>(), seed in any::<u64>()) {
            let x = BitSequence::from_bools(a.iter().copied());
            let mut rng = ChaCha8Rng::seed_from_u64(b_seed);
            let y: BitSequence = (0..x.len()).map(|_| rng.random::<bool>()).collect();
            let out = x.len().div_ceil(2);
            let lhs = toeplitz_hash(&x.xor(&y).unwrap(), out, seed);
            let rhs = toeplitz_hash(&x, out, seed).xor(&toeplitz_hash(&y, out, seed)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn exact_output_length(l in 1usize..3000, m in 0usize..3000, s in 0usize..200) {
            prop_assume!(l > m + s);
            let key = BitSequence::zeros(l);
            let out = privacy_amplify(&key, PaParams { l, m, s }, 3).unwrap();
            prop_assert_eq!(out.len(), l - m - s);
        }
    }
}
