use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::QkdError;
use crate::bitstream::{BitBuilder, BitSequence};

pub const MIN_ESTIMATION_BITS: usize = 10;

/// Sampled quantum bit error rate and the abort verdict against `e_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QberEstimate {
    pub error_rate: f64,
    pub e_max: f64,
    pub sampled_bits: usize,
    pub abort: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QberOutcome {
    pub estimate: QberEstimate,
    pub alice_remaining: BitSequence,
    pub bob_remaining: BitSequence,
}

/// Compares a seeded random sample of `round(sample_fraction · L)` positions
/// (at least one) and removes them from both keys.
pub fn estimate_qber(
    alice: &BitSequence,
    bob: &BitSequence,
    sample_fraction: f64,
    e_max: f64,
    seed: u64,
) -> Result<QberOutcome, QkdError> {
    if alice.len() != bob.len() {
        return Err(QkdError::LengthMismatch(format!("alice {} bits, bob {} bits", alice.len(), bob.len())));
    }
    if !(sample_fraction > 0.0 && sample_fraction < 1.0) {
        return Err(QkdError::InvalidConfig(format!("sample_fraction = {sample_fraction} is not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&e_max) {
        return Err(QkdError::InvalidConfig(format!("e_max = {e_max} is not in [0, 1]")));
    }
    let len = alice.len();
    if len < MIN_ESTIMATION_BITS {
        return Err(QkdError::KeyTooShort { len, min: MIN_ESTIMATION_BITS });
    }

    let sample = ((sample_fraction * len as f64).round() as usize).clamp(1, len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = vec![false; len];
    for i in rand::seq::index::sample(&mut rng, len, sample) {
        picked[i] = true;
    }

    let mut mismatches = 0usize;
    let mut a_rem = BitBuilder::with_capacity(len - sample);
    let mut b_rem = BitBuilder::with_capacity(len - sample);
    for (i, &is_sampled) in picked.iter().enumerate() {
        let (a, b) = (alice.get(i), bob.get(i));
        if is_sampled {
            mismatches += (a != b) as usize;
        } else {
            a_rem.push(a);
            b_rem.push(b);
        }
    }
    let error_rate = mismatches as f64 / sample as f64;
    Ok(QberOutcome {
        estimate: QberEstimate { error_rate, e_max, sampled_bits: sample, abort: error_rate > e_max },
        alice_remaining: a_rem.finish(),
        bob_remaining: b_rem.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::{generate_photons, sift, transmit_and_measure, Basis, ChannelConfig, Eavesdropper};

    fn random_key(len: usize, seed: u64) -> BitSequence {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random::<bool>()).collect()
    }

    #[test]
    fn identical_keys() {
        let k = random_key(1_000, 1);
        let out = estimate_qber(&k, &k, 0.1, 0.11, 3).unwrap();
        assert_eq!(out.estimate.error_rate, 0.0);
        assert!(!out.estimate.abort);
        assert_eq!(out.estimate.sampled_bits, 100);
        assert_eq!(out.alice_remaining.len(), 900);
        assert_eq!(out.alice_remaining, out.bob_remaining);
    }

    #[test]
    fn complementary_keys() {
        let a = random_key(500, 2);
        let b: BitSequence = a.iter().map(|x| !x).collect();
        let out = estimate_qber(&a, &b, 0.2, 0.99, 3).unwrap();
        assert_eq!(out.estimate.error_rate, 1.0);
        assert!(out.estimate.abort);
    }

    #[test]
    fn too_short_and_mismatch() {
        let k = random_key(9, 2);
        assert!(matches!(estimate_qber(&k, &k, 0.5, 0.1, 0), Err(QkdError::KeyTooShort { len: 9, .. })));
        let k2 = random_key(12, 2);
        assert!(matches!(estimate_qber(&k2, &k, 0.5, 0.1, 0), Err(QkdError::LengthMismatch(_))));
        assert!(estimate_qber(&k2, &k2, 0.0, 0.1, 0).is_err());
        assert!(estimate_qber(&k2, &k2, 1.0, 0.1, 0).is_err());
    }

    #[test]
    fn remaining_preserves_order() {
        let a = BitSequence::from_ascii("0000000000111111111100000").unwrap();
        let out = estimate_qber(&a, &a, 0.2, 0.1, 5).unwrap();
        assert_eq!(out.alice_remaining.len(), 20);
        let s = out.alice_remaining.to_ascii();
        // still three runs: zeros, ones, zeros
        let runs = 1 + s.as_bytes().windows(2).filter(|w| w[0] != w[1]).count();
        assert!(runs <= 3);
    }

    #[test]
    fn five_percent_channel() {
        let cfg = ChannelConfig { flip_prob: 0.05, loss_prob: 0.0, eve: Eavesdropper::None };
        for seed in 0..5u64 {
            let photons = generate_photons(100_000, seed);
            let m = transmit_and_measure(&photons, &cfg, seed ^ 0xabc).unwrap();
            let prep: Vec<Basis> = photons.iter().map(|p| p.prep_basis).collect();
            let sent: BitSequence = photons.iter().map(|p| p.bit).collect();
            let (a, b) = sift(&prep, &m.receiver_bases, &sent, &m.receiver_bits, &m.received_mask).unwrap();
            let out = estimate_qber(&a, &b, 0.1, 0.11, seed).unwrap();
            assert!((out.estimate.error_rate - 0.05).abs() < 0.02);
            assert!(!out.estimate.abort);
        }
    }
}
