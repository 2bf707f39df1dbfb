//! Maurer's universal statistical test.

use std::f64::consts::SQRT_2;

use super::{named, need_bits, TestError, TestId, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::erfc;

pub const MAURER_MIN_BITS: usize = 387_840;

// (n threshold, L)
const L_THRESHOLDS: [(usize, usize); 11] = [
    (387_840, 6),
    (904_960, 7),
    (2_068_480, 8),
    (4_654_080, 9),
    (10_342_400, 10),
    (22_753_280, 11),
    (49_643_520, 12),
    (107_560_960, 13),
    (231_669_760, 14),
    (496_435_200, 15),
    (1_059_061_760, 16),
];

// expected value and variance of f_n for L = 6..=16
const REFERENCE: [(f64, f64); 11] = [
    (5.217_705_2, 2.954),
    (6.196_250_7, 3.125),
    (7.183_665_6, 3.238),
    (8.176_424_8, 3.311),
    (9.172_324_3, 3.356),
    (10.170_032, 3.384),
    (11.168_765, 3.401),
    (12.168_070, 3.410),
    (13.167_693, 3.416),
    (14.167_488, 3.419),
    (15.167_379, 3.421),
];

/// Largest tabulated L whose length threshold `n` reaches.
pub fn maurer_default_block_len(n: usize) -> Option<usize> {
    L_THRESHOLDS.iter().rev().find(|&&(t, _)| n >= t).map(|&(_, l)| l)
}

/// Sum of `log2(distance to previous occurrence)` over the test blocks.
pub(crate) fn maurer_log_sum(seq: &BitSequence, l: usize, q: usize, k: usize) -> f64 {
    let mut last = vec![0usize; 1 << l];
    for i in 1..=q {
        last[seq.word((i - 1) * l, l) as usize] = i;
    }
    let mut sum = 0.0;
    for i in q + 1..=q + k {
        let w = seq.word((i - 1) * l, l) as usize;
        sum += ((i - last[w]) as f64).log2();
        last[w] = i;
    }
    sum
}

pub fn maurer_universal(seq: &BitSequence, l: Option<usize>, q: Option<usize>) -> Result<TestResult, TestError> {
    let n = seq.len();
    let l = match l {
        Some(l) => l,
        None => {
            need_bits(MAURER_MIN_BITS, n)?;
            maurer_default_block_len(n).expect("n above minimum")
        }
    };
    if !(6..=16).contains(&l) {
        return Err(TestError::InvalidParameter(format!("Maurer block length L = {l} is outside [6, 16]")));
    }
    let q = q.unwrap_or(10 << l);
    if q == 0 {
        return Err(TestError::InvalidParameter("Maurer needs at least one initialization block".into()));
    }
    need_bits((q + 1) * l, n)?;
    let k = n / l - q;
    let f_n = maurer_log_sum(seq, l, q, k) / k as f64;
    let (expected, variance) = REFERENCE[l - 6];
    let (lf, kf) = (l as f64, k as f64);
    let c = 0.7 - 0.8 / lf + (4.0 + 32.0 / lf) * kf.powf(-3.0 / lf) / 15.0;
    let sigma = c * (variance / kf).sqrt();
    let p = erfc((f_n - expected).abs() / (SQRT_2 * sigma));
    Ok(TestResult::new(
        TestId::MaurerUniversal,
        named(&[("n", n as f64), ("L", lf), ("Q", q as f64), ("K", kf)]),
        named(&[("f_n", f_n), ("expected", expected), ("sigma", sigma)]),
        vec![p],
    ))
}
