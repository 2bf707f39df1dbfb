//! Cascade-style parity reconciliation.
//!
//! Each pass splits the (optionally permuted) key into blocks and compares
//! block parities. A mismatching block is bisected with further parity
//! exchanges until one erroneous bit is isolated and flipped on the
//! receiver side. Flipping a bit changes the parity of the blocks holding it
//! in earlier passes, so those blocks are re-examined (the cascade) until
//! every examined block agrees. Every disclosed parity counts as one leaked
//! bit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{derive_seed, QkdError};
use crate::bitstream::BitSequence;

/// How the block size evolves from one pass to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSchedule {
    /// `K · 2^pass`, the classic Cascade schedule.
    Doubling,
    /// `max(2, K >> pass)`.
    Halving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconConfig {
    pub block_size: usize,
    pub rounds: usize,
    pub permute_between_rounds: bool,
    pub schedule: BlockSchedule,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig { block_size: 16, rounds: 3, permute_between_rounds: true, schedule: BlockSchedule::Doubling }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<(), QkdError> {
        if self.block_size < 2 {
            return Err(QkdError::InvalidConfig(format!("block size K = {} must be at least 2", self.block_size)));
        }
        if self.rounds < 1 {
            return Err(QkdError::InvalidConfig("reconciliation needs at least one round".into()));
        }
        Ok(())
    }

    pub fn block_size_for_round(&self, round: usize) -> usize {
        match self.schedule {
            BlockSchedule::Doubling => self.block_size.saturating_mul(1usize.checked_shl(round as u32).unwrap_or(usize::MAX)),
            BlockSchedule::Halving => (self.block_size >> round.min(63)).max(2),
        }
    }
}

/// One side's view after reconciliation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub key: BitSequence,
    pub corrected_errors: usize,
    pub leaked_bits: usize,
}

struct Pass {
    block_size: usize,
    /// order[k] = key index at permuted position k
    order: Vec<usize>,
    /// position[i] = permuted position of key index i
    position: Vec<usize>,
    /// blocks whose parity has been disclosed in this pass
    checked: Vec<bool>,
}

impl Pass {
    fn block_of(&self, index: usize) -> usize {
        self.position[index] / self.block_size
    }

    fn block_range(&self, block: usize) -> (usize, usize) {
        let lo = block * self.block_size;
        (lo, (lo + self.block_size).min(self.order.len()))
    }
}

struct Session<'a> {
    alice: &'a [u8],
    bob: Vec<u8>,
    passes: Vec<Pass>,
    leaked: usize,
    corrected: usize,
}

impl Session<'_> {
    fn parity(bits: &[u8], order: &[usize], lo: usize, hi: usize) -> u8 {
        order[lo..hi].iter().fold(0, |acc, &i| acc ^ bits[i])
    }

    fn block_mismatch(&self, pass: usize, block: usize) -> bool {
        let p = &self.passes[pass];
        let (lo, hi) = p.block_range(block);
        Self::parity(self.alice, &p.order, lo, hi) != Self::parity(&self.bob, &p.order, lo, hi)
    }

    /// Binary search inside a block known to have odd error parity.
    fn bisect(&mut self, pass: usize, block: usize) -> usize {
        let p = &self.passes[pass];
        let (mut lo, mut hi) = p.block_range(block);
        while hi - lo > 1 {
            let mid = lo + (hi - lo).div_ceil(2);
            self.leaked += 1;
            if Self::parity(self.alice, &p.order, lo, mid) != Self::parity(&self.bob, &p.order, lo, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        p.order[lo]
    }

    fn correct_block(&mut self, pass: usize, block: usize) {
        let mut pending = vec![(pass, block)];
        while let Some((pass, block)) = pending.pop() {
            if !self.block_mismatch(pass, block) {
                continue;
            }
            let idx = self.bisect(pass, block);
            self.bob[idx] ^= 1;
            self.corrected += 1;
            for (other, p) in self.passes.iter().enumerate() {
                let b = p.block_of(idx);
                if other != pass && p.checked[b] {
                    pending.push((other, b));
                }
            }
        }
    }
}

/// Reconciles `bob` towards `alice`. Returns `(alice_side, bob_side)`; both
/// report the same correction and leakage counts.
pub fn reconcile(
    alice: &BitSequence,
    bob: &BitSequence,
    cfg: &ReconConfig,
    seed: u64,
) -> Result<(ReconResult, ReconResult), QkdError> {
    cfg.validate()?;
    if alice.len() != bob.len() {
        return Err(QkdError::LengthMismatch(format!("alice {} bits, bob {} bits", alice.len(), bob.len())));
    }
    let len = alice.len();
    let alice_bits = alice.to_bit_vec();
    let mut session = Session { alice: &alice_bits, bob: bob.to_bit_vec(), passes: Vec::new(), leaked: 0, corrected: 0 };

    for round in 0..cfg.rounds {
        let block_size = cfg.block_size_for_round(round).min(len.max(1));
        let mut order: Vec<usize> = (0..len).collect();
        if cfg.permute_between_rounds && round > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[round as u64]));
            order.shuffle(&mut rng);
        }
        let mut position = vec![0; len];
        for (k, &i) in order.iter().enumerate() {
            position[i] = k;
        }
        let blocks = len.div_ceil(block_size);
        session.passes.push(Pass { block_size, order, position, checked: vec![false; blocks] });

        let pass = session.passes.len() - 1;
        for block in 0..blocks {
            session.leaked += 1;
            session.passes[pass].checked[block] = true;
            session.correct_block(pass, block);
        }
    }

    let bob_key = BitSequence::from_bools(session.bob.iter().map(|&b| b == 1));
    let (corrected, leaked) = (session.corrected, session.leaked);
    Ok((
        ReconResult { key: alice.clone(), corrected_errors: corrected, leaked_bits: leaked },
        ReconResult { key: bob_key, corrected_errors: corrected, leaked_bits: leaked },
    ))
}
