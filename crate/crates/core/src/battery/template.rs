//! Template matching and serial tests.

use super::{chi_square_p_value, named, need_bits, Named, TestError, TestId, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{igamc_q, ln_gamma};

fn template_value(template: &[bool]) -> u64 {
    template.iter().fold(0u64, |v, &b| (v << 1) | b as u64)
}

/// A template is aperiodic when no proper prefix equals the suffix of the
/// same length, so two occurrences can never overlap.
pub fn is_aperiodic(template: &[bool]) -> bool {
    let m = template.len();
    (1..m).all(|shift| template[shift..] != template[..m - shift])
}

/// Matches of `template` in `seq[start..start + len]`, skipping past each
/// match.
pub fn count_non_overlapping(seq: &BitSequence, start: usize, len: usize, template: &[bool]) -> usize {
    let m = template.len();
    if m == 0 || len < m {
        return 0;
    }
    let target = template_value(template);
    let end = start + len - m;
    let (mut i, mut count) = (start, 0);
    while i <= end {
        if seq.word(i, m) == target {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

/// Matches of `template` in `seq[start..start + len]`, advancing one bit
/// after each match.
pub fn count_overlapping(seq: &BitSequence, start: usize, len: usize, template: &[bool]) -> usize {
    let m = template.len();
    if m == 0 || len < m {
        return 0;
    }
    let target = template_value(template);
    (start..=start + len - m).filter(|&i| seq.word(i, m) == target).count()
}

fn parse_template(text: &str) -> Result<Vec<bool>, TestError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(TestError::InvalidParameter(format!("template {text:?} must contain only 0 and 1"))),
        })
        .collect()
}

pub fn non_overlapping_template(seq: &BitSequence, template: &str, blocks: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    let b = parse_template(template)?;
    let m = b.len();
    if !(2..=10).contains(&m) {
        return Err(TestError::InvalidParameter(format!("template length {m} is outside [2, 10]")));
    }
    if !is_aperiodic(&b) {
        return Err(TestError::PeriodicTemplate(template.to_string()));
    }
    if blocks == 0 {
        return Err(TestError::InvalidParameter("block count N must be positive".into()));
    }
    need_bits(blocks * m, n)?;
    let block_len = n / blocks;
    let (mf, bl) = (m as f64, block_len as f64);
    let mu = (bl - mf + 1.0) / 2f64.powf(mf);
    let var = bl * (1.0 / 2f64.powf(mf) - (2.0 * mf - 1.0) / 2f64.powf(2.0 * mf));
    let counts: Vec<usize> = (0..blocks).map(|j| count_non_overlapping(seq, j * block_len, block_len, &b)).collect();
    let chi2: f64 = counts.iter().map(|&w| (w as f64 - mu).powi(2) / var).sum();
    let p = chi_square_p_value(chi2, blocks as f64);
    let mut stats = named(&[("chi2", chi2), ("mu", mu), ("sigma2", var)]);
    stats.extend(counts.iter().enumerate().map(|(j, &w)| Named { name: format!("W{}", j + 1), value: w as f64 }));
    Ok(TestResult::new(
        TestId::NonOverlappingTemplate,
        named(&[("n", n as f64), ("m", mf), ("M", bl), ("N", blocks as f64)]),
        stats,
        vec![p],
    ))
}

/// Expected matches of an `m`-bit template per `block_len`-bit block,
/// `(M − m + 1) / 2^m`.
pub fn overlapping_lambda(m: usize, block_len: usize) -> f64 {
    (block_len as f64 - m as f64 + 1.0) / 2f64.powi(m as i32)
}

/// Probabilities of 0, 1, 2, 3, 4 and ≥ 5 overlapping matches per block,
/// from the compound-Poisson approximation with `η = λ / 2`.
pub fn overlapping_probabilities(eta: f64) -> [f64; 6] {
    let mut pi = [0.0; 6];
    pi[0] = (-eta).exp();
    for (u, slot) in pi.iter_mut().enumerate().take(5).skip(1) {
        let uf = u as f64;
        *slot = (1..=u)
            .map(|l| {
                let lf = l as f64;
                (-eta - uf * std::f64::consts::LN_2 + lf * eta.ln() - ln_gamma(lf + 1.0) + ln_gamma(uf)
                    - ln_gamma(lf)
                    - ln_gamma(uf - lf + 1.0))
                .exp()
            })
            .sum();
    }
    pi[5] = 1.0 - pi[..5].iter().sum::<f64>();
    pi
}

pub fn overlapping_template(
    seq: &BitSequence,
    m: usize,
    block_len: usize,
    blocks: Option<usize>,
) -> Result<TestResult, TestError> {
    let n = seq.len();
    if !(2..=block_len).contains(&m) || m > 64 {
        return Err(TestError::InvalidParameter(format!("template length {m} does not fit block length {block_len}")));
    }
    let blocks = blocks.unwrap_or(n / block_len);
    need_bits(block_len * blocks.max(1), n)?;
    let template = vec![true; m];
    let lambda = overlapping_lambda(m, block_len);
    let pi = overlapping_probabilities(lambda / 2.0);
    let mut v = [0usize; 6];
    for j in 0..blocks {
        v[count_overlapping(seq, j * block_len, block_len, &template).min(5)] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = v.iter().zip(&pi).map(|(&o, &p)| (o as f64 - nf * p).powi(2) / (nf * p)).sum();
    let p = chi_square_p_value(chi2, 5.0);
    let mut stats = named(&[("chi2", chi2), ("lambda", lambda), ("eta", lambda / 2.0)]);
    stats.extend(v.iter().enumerate().map(|(i, &c)| Named { name: format!("v{i}"), value: c as f64 }));
    Ok(TestResult::new(
        TestId::OverlappingTemplate,
        named(&[("n", n as f64), ("m", m as f64), ("M", block_len as f64), ("N", nf), ("K", 5.0)]),
        stats,
        vec![p],
    ))
}

/// Counts of every `m`-bit pattern over the sequence extended cyclically by
/// its first `m − 1` bits; index is the pattern read MSB-first.
pub fn serial_pattern_counts(seq: &BitSequence, m: usize) -> Vec<usize> {
    let n = seq.len();
    let mut counts = vec![0usize; 1 << m];
    if m == 0 {
        counts[0] = n;
        return counts;
    }
    if n == 0 {
        return counts;
    }
    let mask = (1u64 << m) - 1;
    let mut v = 0u64;
    for i in 0..m - 1 {
        v = (v << 1) | seq.get(i % n) as u64;
    }
    for i in 0..n {
        v = ((v << 1) | seq.get((i + m - 1) % n) as u64) & mask;
        counts[v as usize] += 1;
    }
    counts
}

fn psi_squared(counts: &[usize], n: usize) -> f64 {
    if counts.len() <= 1 {
        return 0.0;
    }
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    counts.len() as f64 / n as f64 * sum_sq - n as f64
}

fn fold_counts(counts: &[usize]) -> Vec<usize> {
    counts.chunks_exact(2).map(|c| c[0] + c[1]).collect()
}

pub fn serial_test(seq: &BitSequence, m: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    let log2n = if n == 0 { 0 } else { (usize::BITS - 1 - n.leading_zeros()) as usize };
    if m == 0 || m + 2 >= log2n {
        return Err(TestError::InvalidM { m, n });
    }
    let c_m = serial_pattern_counts(seq, m);
    let c_m1 = fold_counts(&c_m);
    let c_m2 = if m >= 2 { fold_counts(&c_m1) } else { vec![n] };
    let psi_m = psi_squared(&c_m, n);
    let psi_m1 = psi_squared(&c_m1, n);
    let psi_m2 = if m >= 2 { psi_squared(&c_m2, n) } else { 0.0 };
    let del1 = psi_m - psi_m1;
    let del2 = psi_m - 2.0 * psi_m1 + psi_m2;
    let mf = m as i32;
    let p1 = igamc_q(2f64.powi(mf - 2), (del1 / 2.0).max(0.0)).unwrap_or(0.0);
    // the second difference needs ψ²_{m−2}, so m = 1 yields P1 only
    let mut p_values = vec![p1];
    if m >= 2 {
        p_values.push(igamc_q(2f64.powi(mf - 3), (del2 / 2.0).max(0.0)).unwrap_or(0.0));
    }
    Ok(TestResult::new(
        TestId::Serial,
        named(&[("n", n as f64), ("m", m as f64)]),
        named(&[("psi2_m", psi_m), ("psi2_m1", psi_m1), ("psi2_m2", psi_m2), ("del1", del1), ("del2", del2)]),
        p_values,
    ))
}
