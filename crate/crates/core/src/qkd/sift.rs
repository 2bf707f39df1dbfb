use super::{Basis, QkdError};
use crate::bitstream::{BitBuilder, BitSequence};

/// Raw key extraction: keeps the positions that were received and measured
/// in the preparation basis. Returns `(alice_raw, bob_raw)`.
pub fn sift(
    prep_bases: &[Basis],
    receiver_bases: &[Basis],
    sender_bits: &BitSequence,
    receiver_bits: &BitSequence,
    received_mask: &[bool],
) -> Result<(BitSequence, BitSequence), QkdError> {
    let n = prep_bases.len();
    if receiver_bases.len() != n || sender_bits.len() != n || receiver_bits.len() != n || received_mask.len() != n {
        return Err(QkdError::LengthMismatch(format!(
            "sift inputs: prep {n}, receiver bases {}, sender bits {}, receiver bits {}, mask {}",
            receiver_bases.len(),
            sender_bits.len(),
            receiver_bits.len(),
            received_mask.len()
        )));
    }
    let mut alice = BitBuilder::with_capacity(n / 2);
    let mut bob = BitBuilder::with_capacity(n / 2);
    for i in 0..n {
        if received_mask[i] && prep_bases[i] == receiver_bases[i] {
            alice.push(sender_bits.get(i));
            bob.push(receiver_bits.get(i));
        }
    }
    Ok((alice.finish(), bob.finish()))
}
