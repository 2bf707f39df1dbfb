//! Linear complexity via Berlekamp–Massey over GF(2).

use crate::bitstream::BitSequence;

/// Length of the shortest LFSR that generates `seq`.
pub fn berlekamp_massey(seq: &BitSequence) -> usize {
    berlekamp_massey_range(seq, 0, seq.len())
}

/// Linear complexity of `seq[start..start + len]`.
///
/// Connection polynomials and the sliding window are packed into `u64`
/// limbs; bit `i` of `window` holds `s[n - i]` at step `n`, so the
/// discrepancy is the parity of `conn & window`.
pub fn berlekamp_massey_range(seq: &BitSequence, start: usize, len: usize) -> usize {
    assert!(start + len <= seq.len());
    let limbs = len / 64 + 2;
    let mut conn = vec![0u64; limbs];
    let mut prev = vec![0u64; limbs];
    let mut scratch = vec![0u64; limbs];
    let mut window = vec![0u64; limbs];
    conn[0] = 1;
    prev[0] = 1;
    let mut complexity = 0usize;
    let mut last_change: isize = -1;

    for n in 0..len {
        shl1_in_place(&mut window, seq.get(start + n));
        let active = complexity / 64 + 1;
        let d = conn[..active].iter().zip(&window[..active]).fold(0u32, |acc, (c, w)| acc ^ (c & w).count_ones())
            & 1;
        if d == 0 {
            continue;
        }
        let shift = (n as isize - last_change) as usize;
        if 2 * complexity <= n {
            scratch.copy_from_slice(&conn);
            xor_shifted(&mut conn, &prev, shift);
            std::mem::swap(&mut prev, &mut scratch);
            complexity = n + 1 - complexity;
            last_change = n as isize;
        } else {
            xor_shifted(&mut conn, &prev, shift);
        }
    }
    complexity
}

fn shl1_in_place(v: &mut [u64], incoming: bool) {
    let mut carry = incoming as u64;
    for limb in v.iter_mut() {
        let out = *limb >> 63;
        *limb = (*limb << 1) | carry;
        carry = out;
    }
}

// dst ^= src << shift, truncated to dst's width.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (limb_shift, bit_shift) = (shift / 64, shift % 64);
    for i in (limb_shift..dst.len()).rev() {
        let j = i - limb_shift;
        let mut v = src[j] << bit_shift;
        if bit_shift != 0 && j > 0 {
            v |= src[j - 1] >> (64 - bit_shift);
        }
        dst[i] ^= v;
    }
}
