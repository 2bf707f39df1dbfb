//! DIEHARD-style tests: count-the-1s, parking lot, poker, uniform
//! distribution, maxima of sub-series and extreme points.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{chi_square_p_value, named, need_bits, Named, TestError, TestId, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{erfc, normal_cdf};

/// Letter of a byte by its ones count: 0 for ≤ 2, 1 for 3, 2 for 4, 3 for 5,
/// 4 for ≥ 6.
pub fn letter_class(byte: u8) -> u8 {
    match byte.count_ones() {
        0..=2 => 0,
        3 => 1,
        4 => 2,
        5 => 3,
        _ => 4,
    }
}

/// Letter probabilities for a uniform byte, from binomial(8, 1/2) sums.
pub fn letter_probabilities() -> [f64; 5] {
    let binom = |k: u32| (0..k).fold(1u64, |acc, i| acc * (8 - i as u64) / (i as u64 + 1)) as f64;
    let b: Vec<f64> = (0..=8).map(binom).collect();
    [b[0] + b[1] + b[2], b[3], b[4], b[5], b[6] + b[7] + b[8]].map(|c| c / 256.0)
}

fn word_chi_square(letters: &[u8], len: usize, probs: &[f64; 5]) -> f64 {
    let count = letters.len();
    let cells = 5usize.pow(len as u32);
    let mut obs = vec![0usize; cells];
    for i in 0..count {
        let w = (0..len).fold(0usize, |w, j| w * 5 + letters[(i + j) % count] as usize);
        obs[w] += 1;
    }
    obs.iter()
        .enumerate()
        .map(|(w, &o)| {
            let mut rest = w;
            let mut p = 1.0;
            for _ in 0..len {
                p *= probs[rest % 5];
                rest /= 5;
            }
            let e = count as f64 * p;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

pub fn count_the_ones(seq: &BitSequence) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(800, n)?;
    let letters: Vec<u8> = (0..n / 8).map(|i| letter_class(seq.word(i * 8, 8) as u8)).collect();
    let probs = letter_probabilities();
    let q5 = word_chi_square(&letters, 5, &probs);
    let q4 = word_chi_square(&letters, 4, &probs);
    let stat = q5 - q4;
    let z = (stat - 2500.0) / 5000f64.sqrt();
    let p = 1.0 - normal_cdf(z);
    Ok(TestResult::new(
        TestId::CountTheOnes,
        named(&[("n", n as f64), ("letters", letters.len() as f64)]),
        named(&[("Q5", q5), ("Q4", q4), ("Q5-Q4", stat), ("z", z)]),
        vec![p],
    ))
}

/// Reference distribution of the parked-car count, plus the geometry it was
/// calibrated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkingLotCalibration {
    pub attempts: usize,
    pub side: f64,
    pub mean: f64,
    pub sigma: f64,
}

impl Default for ParkingLotCalibration {
    /// Monte Carlo over 10,000 ChaCha8 trials (seed 0x7061726b); regenerate
    /// with `cargo run --release -p qkdrand-core --example calibrate_parking_lot`.
    fn default() -> Self {
        ParkingLotCalibration { attempts: 12_000, side: 100.0, mean: 3523.307, sigma: 21.586 }
    }
}

/// Parks cars at `coords` in order inside a `side × side` lot, rejecting any
/// car within max-norm distance 1 of a parked car. Returns the number parked.
pub fn park_cars(coords: &[(f64, f64)], side: f64) -> usize {
    let cells = (side.ceil() as usize).max(1);
    let cell_of = |v: f64| (v.max(0.0) as usize).min(cells - 1);
    let mut grid: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cells * cells];
    let mut parked = 0;
    for &(x, y) in coords {
        let (cx, cy) = (cell_of(x), cell_of(y));
        let mut clash = false;
        'scan: for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
            for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
                if grid[gx * cells + gy].iter().any(|&(px, py)| (px - x).abs() < 1.0 && (py - y).abs() < 1.0) {
                    clash = true;
                    break 'scan;
                }
            }
        }
        if !clash {
            grid[cx * cells + cy].push((x, y));
            parked += 1;
        }
    }
    parked
}

pub fn parking_lot(seq: &BitSequence, calib: &ParkingLotCalibration) -> Result<TestResult, TestError> {
    let n = seq.len();
    need_bits(calib.attempts * 64, n)?;
    let scale = calib.side / 4_294_967_296.0;
    let coords: Vec<(f64, f64)> = (0..calib.attempts)
        .map(|i| (seq.word(i * 64, 32) as f64 * scale, seq.word(i * 64 + 32, 32) as f64 * scale))
        .collect();
    let k = park_cars(&coords, calib.side);
    let z = (k as f64 - calib.mean) / calib.sigma;
    let p = erfc(z.abs() / SQRT_2);
    Ok(TestResult::new(
        TestId::ParkingLot,
        named(&[("n", n as f64), ("attempts", calib.attempts as f64), ("side", calib.side)]),
        named(&[("k", k as f64), ("z", z), ("mean", calib.mean), ("sigma", calib.sigma)]),
        vec![p],
    ))
}

pub fn poker_test(seq: &BitSequence, m: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    if !(1..=16).contains(&m) {
        return Err(TestError::InvalidParameter(format!("poker block length m = {m} is outside [1, 16]")));
    }
    let cells = 1usize << m;
    need_bits(5 * cells * m, n)?;
    let k = n / m;
    let mut hist = vec![0usize; cells];
    for i in 0..k {
        hist[seq.word(i * m, m) as usize] += 1;
    }
    let sum_sq: f64 = hist.iter().map(|&c| (c as f64).powi(2)).sum();
    let chi2 = cells as f64 / k as f64 * sum_sq - k as f64;
    let p = chi_square_p_value(chi2, (cells - 1) as f64);
    Ok(TestResult::new(
        TestId::Poker,
        named(&[("n", n as f64), ("m", m as f64), ("k", k as f64)]),
        named(&[("chi2", chi2)]),
        vec![p],
    ))
}

// Interval of the maximum `u` of `sub_len` k-bit words under the transform
// (u / 2^k)^sub_len.
fn max_cell(u: u64, word_bits: usize, sub_len: usize, d: usize) -> usize {
    let x = (u as f64 / 2f64.powi(word_bits as i32)).powi(sub_len as i32);
    ((x * d as f64) as usize).min(d - 1)
}

// Smallest word value landing in each interval, plus 2^k as sentinel.
fn cell_thresholds(word_bits: usize, sub_len: usize, d: usize) -> Vec<u64> {
    let top = 1u64 << word_bits;
    let mut out = Vec::with_capacity(d + 1);
    for i in 0..d {
        let (mut lo, mut hi) = (0u64, top);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if max_cell(mid, word_bits, sub_len, d) >= i {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        out.push(lo);
    }
    out.push(top);
    out
}

/// Exact probability of each interval for the maximum of `sub_len` uniform
/// k-bit words.
fn max_cell_probabilities(word_bits: usize, sub_len: usize, d: usize) -> Vec<f64> {
    let t = cell_thresholds(word_bits, sub_len, d);
    let scale = 2f64.powi(word_bits as i32);
    let below = |v: u64| (v as f64 / scale).powi(sub_len as i32);
    t.windows(2).map(|w| below(w[1]) - below(w[0])).collect()
}

fn interval_test(
    seq: &BitSequence,
    test: TestId,
    word_bits: usize,
    sub_len: usize,
    d: usize,
) -> Result<TestResult, TestError> {
    let n = seq.len();
    if !(1..=32).contains(&word_bits) {
        return Err(TestError::InvalidParameter(format!("word length k = {word_bits} is outside [1, 32]")));
    }
    if d < 2 || d as u64 > 1u64 << word_bits {
        return Err(TestError::InvalidParameter(format!("interval count d = {d} does not fit {word_bits}-bit words")));
    }
    if sub_len == 0 {
        return Err(TestError::InvalidParameter("sub-series length must be positive".into()));
    }
    need_bits(5 * d * sub_len * word_bits, n)?;
    let groups = n / word_bits / sub_len;
    let mut obs = vec![0usize; d];
    for g in 0..groups {
        let max = (0..sub_len).map(|j| seq.word((g * sub_len + j) * word_bits, word_bits)).max().unwrap_or(0);
        obs[max_cell(max, word_bits, sub_len, d)] += 1;
    }
    let probs = max_cell_probabilities(word_bits, sub_len, d);
    let gf = groups as f64;
    let chi2: f64 = obs
        .iter()
        .zip(&probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| (o as f64 - gf * p).powi(2) / (gf * p))
        .sum();
    let p = chi_square_p_value(chi2, (d - 1) as f64);
    let mut stats = named(&[("chi2", chi2)]);
    stats.extend(obs.iter().enumerate().map(|(i, &c)| Named { name: format!("c{i}"), value: c as f64 }));
    let mut params = named(&[("n", n as f64), ("k", word_bits as f64), ("d", d as f64), ("groups", gf)]);
    if test == TestId::MaxSubseries {
        params.push(Named { name: "sub_len".into(), value: sub_len as f64 });
    }
    Ok(TestResult::new(test, params, stats, vec![p]))
}

/// χ² uniformity of k-bit words over `d` equal intervals of `[0, 1)`.
pub fn uniform_distribution(seq: &BitSequence, word_bits: usize, d: usize) -> Result<TestResult, TestError> {
    interval_test(seq, TestId::UniformDistribution, word_bits, 1, d)
}

/// Maxima of consecutive groups of `sub_len` k-bit words, mapped through
/// their CDF and tested for uniformity over `d` intervals.
pub fn max_subseries(seq: &BitSequence, word_bits: usize, sub_len: usize, d: usize) -> Result<TestResult, TestError> {
    interval_test(seq, TestId::MaxSubseries, word_bits, sub_len, d)
}

fn count_extrema(words: &[u64]) -> usize {
    words
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .count()
}

/// Turning-point test on k-bit words.
pub fn extreme_point(seq: &BitSequence, word_bits: usize) -> Result<TestResult, TestError> {
    let n = seq.len();
    if !(1..=64).contains(&word_bits) {
        return Err(TestError::InvalidParameter(format!("word length k = {word_bits} is outside [1, 64]")));
    }
    need_bits(3 * word_bits, n)?;
    let words: Vec<u64> = (0..n / word_bits).map(|i| seq.word(i * word_bits, word_bits)).collect();
    let w = words.len() as f64;
    let count = count_extrema(&words);
    let mean = 2.0 * (w - 2.0) / 3.0;
    let var = (16.0 * w - 29.0) / 90.0;
    let z = (count as f64 - mean) / var.sqrt();
    let p = erfc(z.abs() / SQRT_2);
    Ok(TestResult::new(
        TestId::ExtremePoint,
        named(&[("n", n as f64), ("k", word_bits as f64), ("W", w)]),
        named(&[("extrema", count as f64), ("expected", mean), ("variance", var), ("z", z)]),
        vec![p],
    ))
}
