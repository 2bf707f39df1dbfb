//! Frequency-family tests: monobit, block frequency, runs, longest run of
//! ones and cumulative sums.

use serde::{Deserialize, Serialize};

use super::{chi_square_p_value, named, need_bits, TestError, TestId, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{erfc, normal_cdf};

/// `erfc(|S_n| / √(2n))`.
pub fn monobit_p_value(s_n: i64, n: usize) -> f64 {
    erfc(s_n.unsigned_abs() as f64 / (2.0 * n as f64).sqrt())
}

pub fn frequency_monobit(seq: &BitSequence) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(100, n)?;
    let s_n = 2 * seq.ones_count() as i64 - n as i64;
    let p = monobit_p_value(s_n, n);
    Ok(TestResult::new(
        TestId::Frequency,
        named(&[("n", n as f64)]),
        named(&[
            ("S_n", s_n as f64),
            ("s_obs", s_n.unsigned_abs() as f64 / (n as f64).sqrt()),
            ("S_n/n", s_n as f64 / n as f64),
        ]),
        vec![p],
    ))
}

pub fn block_frequency(seq: &BitSequence, block_len: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(100, n)?;
    if block_len == 0 {
        return Err(TestError::InvalidParameter("block length M must be positive".into()));
    }
    let blocks = n / block_len;
    need_bits(block_len, n)?;
    let sum_sq: f64 = (0..blocks)
        .map(|i| {
            let ones = (0..block_len).filter(|&j| seq.get(i * block_len + j)).count();
            let pi = ones as f64 / block_len as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum();
    let chi2 = 4.0 * block_len as f64 * sum_sq;
    let p = chi_square_p_value(chi2, blocks as f64);
    Ok(TestResult::new(
        TestId::BlockFrequency,
        named(&[("n", n as f64), ("M", block_len as f64), ("N", blocks as f64)]),
        named(&[("chi2", chi2)]),
        vec![p],
    ))
}

pub fn runs_test(seq: &BitSequence) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(100, n)?;
    let pi = seq.ones_count() as f64 / n as f64;
    let tau = 2.0 / (n as f64).sqrt();
    if (pi - 0.5).abs() >= tau {
        return Err(TestError::PreconditionFailed(format!(
            "monobit proportion {pi:.6} deviates from 1/2 by at least tau = {tau:.6}"
        )));
    }
    let shifted = seq.slice(1, n - 1).expect("in range");
    let head = seq.slice(0, n - 1).expect("in range");
    let v_n = 1 + head.hamming_distance(&shifted).expect("equal lengths");
    let spread = pi * (1.0 - pi);
    let num = (v_n as f64 - 2.0 * n as f64 * spread).abs();
    let p = erfc(num / (2.0 * (2.0 * n as f64).sqrt() * spread));
    Ok(TestResult::new(
        TestId::Runs,
        named(&[("n", n as f64)]),
        named(&[("pi", pi), ("V_n", v_n as f64)]),
        vec![p],
    ))
}

/// Block size and class boundaries for the longest-run test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LongestRunLayout {
    pub block_len: usize,
    /// Runs of at most this length share the first class.
    pub low: usize,
    /// Runs of at least this length share the last class.
    pub high: usize,
}

impl LongestRunLayout {
    pub fn classes(&self) -> usize {
        self.high - self.low + 1
    }

    pub fn class_of(&self, run: usize) -> usize {
        run.clamp(self.low, self.high) - self.low
    }
}

/// Layout chosen from the sequence length (M = 8, 128 or 10,000).
pub fn longest_run_layout(n: usize) -> LongestRunLayout {
    if n < 6_272 {
        LongestRunLayout { block_len: 8, low: 1, high: 4 }
    } else if n < 750_000 {
        LongestRunLayout { block_len: 128, low: 4, high: 9 }
    } else {
        LongestRunLayout { block_len: 10_000, low: 10, high: 16 }
    }
}

/// Probability that the longest run of ones in `m` fair bits is at most `r`.
fn longest_run_cdf(m: usize, r: usize) -> f64 {
    // state j: current trailing run of ones, j <= r
    let mut prob = vec![0.0f64; r + 1];
    prob[0] = 1.0;
    let mut next = vec![0.0f64; r + 1];
    for _ in 0..m {
        let total: f64 = prob.iter().sum();
        next.iter_mut().for_each(|v| *v = 0.0);
        next[0] = 0.5 * total;
        for j in 0..r {
            next[j + 1] += 0.5 * prob[j];
        }
        std::mem::swap(&mut prob, &mut next);
    }
    prob.iter().sum()
}

/// Exact class probabilities for a layout, by dynamic programming over the
/// current run length.
pub fn longest_run_class_probabilities(layout: &LongestRunLayout) -> Vec<f64> {
    let m = layout.block_len;
    let mut out = Vec::with_capacity(layout.classes());
    let mut prev = 0.0;
    for v in layout.low..layout.high {
        let cdf = longest_run_cdf(m, v);
        out.push(cdf - prev);
        prev = cdf;
    }
    out.push(1.0 - prev);
    out
}

pub(crate) fn longest_run_in(seq: &BitSequence, start: usize, len: usize) -> usize {
    let (mut best, mut cur) = (0, 0);
    for i in start..start + len {
        if seq.get(i) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

pub fn longest_run(seq: &BitSequence) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(128, n)?;
    let layout = longest_run_layout(n);
    let blocks = n / layout.block_len;
    let mut counts = vec![0usize; layout.classes()];
    for b in 0..blocks {
        counts[layout.class_of(longest_run_in(seq, b * layout.block_len, layout.block_len))] += 1;
    }
    let probs = longest_run_class_probabilities(&layout);
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = blocks as f64 * p;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let k = layout.classes() - 1;
    let p = chi_square_p_value(chi2, k as f64);
    let mut stats = named(&[("chi2", chi2)]);
    for (i, &c) in counts.iter().enumerate() {
        stats.push(super::Named { name: format!("v{i}"), value: c as f64 });
    }
    Ok(TestResult::new(
        TestId::LongestRun,
        named(&[("n", n as f64), ("M", layout.block_len as f64), ("N", blocks as f64), ("K", k as f64)]),
        stats,
        vec![p],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CusumDirection {
    Forward,
    Backward,
}

/// P-value for maximal excursion `z` of a ±1 walk of length `n`.
pub fn cusum_p_value(z: usize, n: usize) -> f64 {
    let (z, nf) = (z as f64, n as f64);
    let sqrt_n = nf.sqrt();
    let lo1 = ((-nf / z + 1.0) / 4.0).trunc() as i64;
    let lo2 = ((-nf / z - 3.0) / 4.0).trunc() as i64;
    let hi = ((nf / z - 1.0) / 4.0).trunc() as i64;
    let mut sum1 = 0.0;
    for k in lo1..=hi {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * z / sqrt_n) - normal_cdf((4.0 * k - 1.0) * z / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in lo2..=hi {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * z / sqrt_n) - normal_cdf((4.0 * k + 1.0) * z / sqrt_n);
    }
    1.0 - sum1 + sum2
}

pub fn cumulative_sums(seq: &BitSequence, direction: CusumDirection) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(100, n)?;
    let mut s = 0i64;
    let mut z = 0u64;
    let mut step = |bit: bool| {
        s += if bit { 1 } else { -1 };
        z = z.max(s.unsigned_abs());
    };
    match direction {
        CusumDirection::Forward => (0..n).for_each(|i| step(seq.get(i))),
        CusumDirection::Backward => (0..n).rev().for_each(|i| step(seq.get(i))),
    }
    let p = cusum_p_value(z as usize, n);
    let test = match direction {
        CusumDirection::Forward => TestId::CumulativeSumsForward,
        CusumDirection::Backward => TestId::CumulativeSumsBackward,
    };
    Ok(TestResult::new(test, named(&[("n", n as f64)]), named(&[("z", z as f64)]), vec![p]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(n: usize, seed: u64) -> BitSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<bool>()).collect()
    }

    fn alternating(n: usize) -> BitSequence {
        (0..n).map(|i| i % 2 == 1).collect()
    }

    #[test]
    fn monobit_examples() {
        let r = frequency_monobit(&alternating(1000)).unwrap();
        assert_eq!(r.statistic("S_n"), Some(0.0));
        assert_eq!(r.p_values, vec![1.0]);
        let r = frequency_monobit(&BitSequence::zeros(100)).unwrap();
        assert!(r.p_values[0] < 1e-20 && !r.pass);
        assert!(matches!(frequency_monobit(&BitSequence::zeros(99)), Err(TestError::TooFewBits { .. })));
    }

    #[test]
    fn monobit_paper_point() {
        // S_n = 518 over 10^6 bits: 500,259 ones
        let seq: BitSequence = (0..1_000_000).map(|i| i < 500_259).collect();
        let r = frequency_monobit(&seq).unwrap();
        assert_eq!(r.statistic("S_n"), Some(518.0));
        assert!((r.statistic("S_n/n").unwrap() - 0.000518).abs() < 1e-12);
        // scipy.special.erfc(518 / sqrt(2e6))
        assert!((r.p_values[0] - 0.604_458_269_330_708_6).abs() < 1e-12);
    }

    #[test]
    fn block_frequency_examples() {
        let half: BitSequence = (0..200).map(|i| i % 10 < 5).collect();
        let r = block_frequency(&half, 10).unwrap();
        assert_eq!(r.statistic("chi2"), Some(0.0));
        assert_eq!(r.p_values, vec![1.0]);

        let r = block_frequency(&BitSequence::zeros(100), 10).unwrap();
        assert_eq!(r.statistic("chi2"), Some(100.0));
        assert!(!r.pass);
        assert!(block_frequency(&BitSequence::zeros(100), 0).is_err());
    }

    #[test]
    fn block_frequency_recount() {
        let seq = random_seq(10_000, 4);
        let bits = seq.to_bit_vec();
        let mut chi2 = 0.0;
        for block in bits.chunks_exact(100) {
            let pi = block.iter().map(|&b| b as f64).sum::<f64>() / 100.0;
            chi2 += 4.0 * 100.0 * (pi - 0.5).powi(2);
        }
        let r = block_frequency(&seq, 100).unwrap();
        assert!((r.statistic("chi2").unwrap() - chi2).abs() < 1e-9);
    }

    #[test]
    fn runs_examples() {
        assert!(matches!(runs_test(&BitSequence::zeros(1000)), Err(TestError::PreconditionFailed(_))));

        let r = runs_test(&alternating(128)).unwrap();
        assert_eq!(r.statistic("V_n"), Some(128.0));
        // |128 - 2·128·¼| / (2·√256·¼) = 64 / 8 = 8
        assert!((r.p_values[0] - erfc(8.0)).abs() < 1e-300);

        let seq = random_seq(10_000, 6);
        let bits = seq.to_bit_vec();
        let naive = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(runs_test(&seq).unwrap().statistic("V_n"), Some(naive as f64));
    }

    #[test]
    fn nist_runs_example() {
        // NIST SP 800-22 §2.3.8 example: 100 bits of ε, P = 0.500798
        let eps = "11001001000011111101101010100010001000010110100011\
                   00001000110100110001001100011001100010100010111000";
        let r = runs_test(&BitSequence::from_ascii(eps).unwrap()).unwrap();
        assert_eq!(r.statistic("V_n"), Some(52.0));
        assert!((r.p_values[0] - 0.500798).abs() < 1e-6);
    }

    #[test]
    fn longest_run_probabilities_match_tables() {
        let p8 = longest_run_class_probabilities(&longest_run_layout(128));
        for (got, want) in p8.iter().zip([0.21484375, 0.3671875, 0.23046875, 0.1875]) {
            assert!((got - want).abs() < 1e-12);
        }
        let p128 = longest_run_class_probabilities(&longest_run_layout(10_000));
        for (got, want) in p128.iter().zip([0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        let p10k = longest_run_class_probabilities(&longest_run_layout(1_000_000));
        // the published M = 10,000 row comes from an asymptotic
        // approximation and is off by up to about 1.6e-3
        for (got, want) in p10k.iter().zip([0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727]) {
            assert!((got - want).abs() < 2e-3, "{got} vs {want}");
        }
        for probs in [p8, p128, p10k] {
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn longest_run_examples() {
        assert!(matches!(longest_run(&random_seq(127, 1)), Err(TestError::TooFewBits { needed: 128, got: 127 })));

        let ones: BitSequence = (0..1024).map(|_| true).collect();
        let r = longest_run(&ones).unwrap();
        // 128 blocks of 8, every block in the top class
        let probs = longest_run_class_probabilities(&longest_run_layout(1024));
        let n = 128.0;
        let chi2: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let obs = if i == 3 { n } else { 0.0 };
                (obs - n * p).powi(2) / (n * p)
            })
            .sum();
        assert!((r.statistic("chi2").unwrap() - chi2).abs() < 1e-9);
        assert_eq!(r.statistic("v3"), Some(128.0));
        assert!(!r.pass);
    }

    #[test]
    fn longest_run_recount() {
        let seq = random_seq(20_000, 8);
        let bits = seq.to_bit_vec();
        let mut counts = [0usize; 6];
        for block in bits.chunks_exact(128) {
            let mut best = 0;
            let mut cur = 0;
            for &b in block {
                cur = if b == 1 { cur + 1 } else { 0 };
                best = best.max(cur);
            }
            counts[best.clamp(4, 9) - 4] += 1;
        }
        let r = longest_run(&seq).unwrap();
        for (i, c) in counts.iter().enumerate() {
            assert_eq!(r.statistic(&format!("v{i}")), Some(*c as f64));
        }
    }

    #[test]
    fn cusum_examples() {
        let alt = alternating(1000);
        let r = cumulative_sums(&alt, CusumDirection::Forward).unwrap();
        assert_eq!(r.statistic("z"), Some(1.0));
        // direct evaluation at z = 1: terms run over k in [-249, 249] and [-250, 249]
        let n = 1000.0f64;
        let mut direct = 1.0;
        for k in -249..=249 {
            let k = k as f64;
            direct -= normal_cdf((4.0 * k + 1.0) / n.sqrt()) - normal_cdf((4.0 * k - 1.0) / n.sqrt());
        }
        for k in -250..=249 {
            let k = k as f64;
            direct += normal_cdf((4.0 * k + 3.0) / n.sqrt()) - normal_cdf((4.0 * k + 1.0) / n.sqrt());
        }
        assert!((r.p_values[0] - direct).abs() < 1e-12);

        let ones: BitSequence = (0..100).map(|_| true).collect();
        let r = cumulative_sums(&ones, CusumDirection::Forward).unwrap();
        assert_eq!(r.statistic("z"), Some(100.0));
        assert!(r.p_values[0] < 1e-10 && !r.pass);
    }

    #[test]
    fn nist_cusum_example() {
        let eps = "11001001000011111101101010100010001000010110100011\
                   00001000110100110001001100011001100010100010111000";
        let seq = BitSequence::from_ascii(eps).unwrap();
        let f = cumulative_sums(&seq, CusumDirection::Forward).unwrap();
        let b = cumulative_sums(&seq, CusumDirection::Backward).unwrap();
        assert!((f.p_values[0] - 0.219194).abs() < 1e-6);
        assert!((b.p_values[0] - 0.114866).abs() < 1e-6);
    }

    #[test]
    fn cusum_palindrome_symmetry() {
        let half = random_seq(300, 3);
        let pal = half.concat(&half.reversed());
        let f = cumulative_sums(&pal, CusumDirection::Forward).unwrap();
        let b = cumulative_sums(&pal, CusumDirection::Backward).unwrap();
        assert_eq!(f.p_values, b.p_values);
    }
}
