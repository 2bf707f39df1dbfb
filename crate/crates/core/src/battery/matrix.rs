//! Binary matrix rank and linear complexity tests.

use super::{chi_square_p_value, named, need_bits, Named, TestError, TestId, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{berlekamp_massey_range, rank_probability, Gf2Matrix};

const RANK_DIM: usize = 32;

/// Probabilities of full rank, rank 31 and rank ≤ 30 for a random 32×32
/// matrix over GF(2).
pub fn rank_category_probabilities() -> [f64; 3] {
    let full = rank_probability(RANK_DIM, RANK_DIM, RANK_DIM);
    let minus_one = rank_probability(RANK_DIM, RANK_DIM, RANK_DIM - 1);
    let rest: f64 = (0..RANK_DIM - 1).map(|r| rank_probability(RANK_DIM, RANK_DIM, r)).sum();
    [full, minus_one, rest]
}

/// `Q(1, χ²/2) = e^{−χ²/2}` for the two-degree-of-freedom rank statistic.
pub fn rank_p_value(chi2: f64) -> f64 {
    chi_square_p_value(chi2, 2.0)
}

pub fn rank_test(seq: &BitSequence) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(38_912, n)?;
    let per = RANK_DIM * RANK_DIM;
    let count = n / per;
    let mut f = [0usize; 3];
    for k in 0..count {
        let rank = Gf2Matrix::from_bits(seq, k * per, RANK_DIM, RANK_DIM).rank();
        f[match rank {
            32 => 0,
            31 => 1,
            _ => 2,
        }] += 1;
    }
    let probs = rank_category_probabilities();
    let nf = count as f64;
    let chi2: f64 = f.iter().zip(&probs).map(|(&o, &p)| (o as f64 - nf * p).powi(2) / (nf * p)).sum();
    let p = rank_p_value(chi2);
    Ok(TestResult::new(
        TestId::Rank,
        named(&[("n", n as f64), ("M", RANK_DIM as f64), ("Q", RANK_DIM as f64), ("N", nf)]),
        named(&[("chi2", chi2), ("F_32", f[0] as f64), ("F_31", f[1] as f64), ("F_30", f[2] as f64)]),
        vec![p],
    ))
}

/// Expected linear complexity of `m` random bits.
pub fn linear_complexity_mean(m: usize) -> f64 {
    let mf = m as f64;
    let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 }; // (−1)^(M+1)
    mf / 2.0 + (9.0 + sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powf(mf)
}

/// Linear complexity of each full `m`-bit block.
pub fn block_complexities(seq: &BitSequence, m: usize) -> Vec<usize> {
    if m == 0 {
        return Vec::new();
    }
    (0..seq.len() / m).map(|i| berlekamp_massey_range(seq, i * m, m)).collect()
}

const LC_PI: [f64; 7] = [1.0 / 96.0, 1.0 / 32.0, 1.0 / 8.0, 1.0 / 2.0, 1.0 / 4.0, 1.0 / 16.0, 1.0 / 48.0];

fn lc_class(t: f64) -> usize {
    if t <= -2.5 {
        0
    } else if t <= -1.5 {
        1
    } else if t <= -0.5 {
        2
    } else if t <= 0.5 {
        3
    } else if t <= 1.5 {
        4
    } else if t <= 2.5 {
        5
    } else {
        6
    }
}

pub fn linear_complexity(seq: &BitSequence, m: usize, min_blocks: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    if !(500..=5000).contains(&m) {
        return Err(TestError::InvalidParameter(format!("linear complexity block length M = {m} is outside [500, 5000]")));
    }
    need_bits(m * min_blocks.max(1), n)?;
    let blocks = block_complexities(seq, m);
    let mu = linear_complexity_mean(m);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut v = [0usize; 7];
    for &l in &blocks {
        let t = sign * (l as f64 - mu) + 2.0 / 9.0;
        v[lc_class(t)] += 1;
    }
    let nf = blocks.len() as f64;
    let chi2: f64 = v.iter().zip(&LC_PI).map(|(&o, &p)| (o as f64 - nf * p).powi(2) / (nf * p)).sum();
    let p = chi_square_p_value(chi2, 6.0);
    let mut stats = named(&[("chi2", chi2), ("mu", mu)]);
    stats.extend(v.iter().enumerate().map(|(i, &c)| Named { name: format!("v{i}"), value: c as f64 }));
    Ok(TestResult::new(
        TestId::LinearComplexity,
        named(&[("n", n as f64), ("M", m as f64), ("N", nf), ("K", 6.0)]),
        stats,
        vec![p],
    ))
}
