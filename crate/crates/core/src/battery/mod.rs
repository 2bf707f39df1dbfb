//! Statistical randomness battery.
//!
//! Every test maps a [`BitSequence`] (plus parameters) to one or more
//! P-values. A test passes when every P-value is at least the significance
//! level α. P-value kernels follow NIST SP 800-22 where the test comes from
//! that suite; the DIEHARD-family tests use the constructions documented on
//! each function.
//!
//! [`run_battery`] evaluates an enabled subset. A test whose minimum input
//! size or precondition is not met is reported as skipped, never as failed.

mod diehard;
mod frequency;
mod matrix;
mod maurer;
mod template;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::BitSequence;
use crate::stats::igamc_q;

pub use diehard::{
    count_the_ones, extreme_point, letter_class, letter_probabilities, max_subseries, park_cars, parking_lot,
    poker_test, uniform_distribution, ParkingLotCalibration,
};
pub use frequency::{
    block_frequency, cumulative_sums, cusum_p_value, longest_run, longest_run_class_probabilities,
    longest_run_layout, frequency_monobit, monobit_p_value, runs_test, CusumDirection, LongestRunLayout,
};
pub use matrix::{
    block_complexities, linear_complexity, linear_complexity_mean, rank_category_probabilities, rank_p_value, rank_test,
};
pub use maurer::{maurer_default_block_len, maurer_universal, MAURER_MIN_BITS};
pub use template::{
    count_non_overlapping, count_overlapping, is_aperiodic, non_overlapping_template, overlapping_lambda,
    overlapping_probabilities, overlapping_template, serial_pattern_counts, serial_test,
};

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestError {
    #[error("too few bits: need at least {needed}, got {got}")]
    TooFewBits { needed: usize, got: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("template {0} is periodic")]
    PeriodicTemplate(String),
    #[error("invalid m = {m} for n = {n}: need 1 <= m < floor(log2 n) - 2")]
    InvalidM { m: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn need_bits(needed: usize, got: usize) -> Result<(), TestError> {
    if got < needed {
        Err(TestError::TooFewBits { needed, got })
    } else {
        Ok(())
    }
}

/// Identifiers of the battery tests, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestId {
    Frequency,
    BlockFrequency,
    Runs,
    LongestRun,
    Rank,
    NonOverlappingTemplate,
    OverlappingTemplate,
    MaurerUniversal,
    LinearComplexity,
    Serial,
    CumulativeSumsForward,
    CumulativeSumsBackward,
    CountTheOnes,
    ParkingLot,
    Poker,
    UniformDistribution,
    MaxSubseries,
    ExtremePoint,
}

impl TestId {
    pub const ALL: [TestId; 18] = [
        TestId::Frequency,
        TestId::BlockFrequency,
        TestId::Runs,
        TestId::LongestRun,
        TestId::Rank,
        TestId::NonOverlappingTemplate,
        TestId::OverlappingTemplate,
        TestId::MaurerUniversal,
        TestId::LinearComplexity,
        TestId::Serial,
        TestId::CumulativeSumsForward,
        TestId::CumulativeSumsBackward,
        TestId::CountTheOnes,
        TestId::ParkingLot,
        TestId::Poker,
        TestId::UniformDistribution,
        TestId::MaxSubseries,
        TestId::ExtremePoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::Frequency => "frequency",
            TestId::BlockFrequency => "block_frequency",
            TestId::Runs => "runs",
            TestId::LongestRun => "longest_run",
            TestId::Rank => "rank",
            TestId::NonOverlappingTemplate => "non_overlapping_template",
            TestId::OverlappingTemplate => "overlapping_template",
            TestId::MaurerUniversal => "maurer_universal",
            TestId::LinearComplexity => "linear_complexity",
            TestId::Serial => "serial",
            TestId::CumulativeSumsForward => "cumulative_sums_forward",
            TestId::CumulativeSumsBackward => "cumulative_sums_backward",
            TestId::CountTheOnes => "count_the_ones",
            TestId::ParkingLot => "parking_lot",
            TestId::Poker => "poker",
            TestId::UniformDistribution => "uniform_distribution",
            TestId::MaxSubseries => "max_subseries",
            TestId::ExtremePoint => "extreme_point",
        }
    }

    /// Smallest input, in bits, for which the test is considered applicable.
    pub fn minimum_bits(self) -> usize {
        match self {
            TestId::LongestRun => 128,
            TestId::Rank => 38_912,
            TestId::MaurerUniversal => MAURER_MIN_BITS,
            TestId::CountTheOnes => 800,
            TestId::ExtremePoint => 100_000,
            TestId::NonOverlappingTemplate | TestId::OverlappingTemplate | TestId::Serial | TestId::Poker => 0,
            TestId::LinearComplexity => 0,
            _ => 100,
        }
    }

    /// Parses a comma-separated list. `cumulative_sums` (or `cusum`)
    /// selects both directions; `all` selects everything.
    pub fn parse_list(list: &str) -> Result<Vec<TestId>, String> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "all" => out.extend(TestId::ALL),
                "cumulative_sums" | "cusum" => {
                    out.extend([TestId::CumulativeSumsForward, TestId::CumulativeSumsBackward])
                }
                other => out.push(other.parse()?),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "monobit" | "frequency_monobit" => Some(TestId::Frequency),
            "longest_run_of_ones" => Some(TestId::LongestRun),
            "maurer" | "universal" => Some(TestId::MaurerUniversal),
            "cusum_forward" => Some(TestId::CumulativeSumsForward),
            "cusum_backward" => Some(TestId::CumulativeSumsBackward),
            "poker_test" => Some(TestId::Poker),
            _ => None,
        };
        alias
            .or_else(|| TestId::ALL.into_iter().find(|t| t.name() == s))
            .ok_or_else(|| format!("unknown test `{s}`"))
    }
}

/// A named real value (parameter or statistic) in a [`TestResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Named {
    pub name: String,
    pub value: f64,
}

pub(crate) fn named(pairs: &[(&str, f64)]) -> Vec<Named> {
    pairs.iter().map(|&(name, value)| Named { name: name.to_string(), value }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestId,
    pub params: Vec<Named>,
    pub statistics: Vec<Named>,
    pub p_values: Vec<f64>,
    pub alpha: f64,
    pub pass: bool,
}

impl TestResult {
    pub(crate) fn new(test: TestId, params: Vec<Named>, statistics: Vec<Named>, p_values: Vec<f64>) -> Self {
        let p_values: Vec<f64> = p_values.into_iter().map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) }).collect();
        let mut r = TestResult { test, params, statistics, p_values, alpha: DEFAULT_ALPHA, pass: false };
        r.pass = r.passes_at(DEFAULT_ALPHA);
        r
    }

    pub fn passes_at(&self, alpha: f64) -> bool {
        self.p_values.iter().all(|&p| p >= alpha)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self.pass = self.passes_at(alpha);
        self
    }

    pub fn min_p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(1.0, f64::min)
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

/// Upper-tail χ² P-value with `dof` degrees of freedom: `Q(dof/2, χ²/2)`.
pub fn chi_square_p_value(chi2: f64, dof: f64) -> f64 {
    igamc_q(dof / 2.0, (chi2 / 2.0).max(0.0)).unwrap_or(0.0)
}

/// Per-test parameters; defaults follow NIST recommendations and the
/// reference run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestParams {
    pub block_frequency_len: usize,
    pub non_overlapping_template: String,
    pub non_overlapping_blocks: usize,
    pub overlapping_template_len: usize,
    pub overlapping_block_len: usize,
    /// `None`: use `floor(n / block_len)` blocks.
    pub overlapping_blocks: Option<usize>,
    /// `None`: choose L from the sequence length.
    pub maurer_block_len: Option<usize>,
    pub maurer_init_blocks: Option<usize>,
    pub linear_complexity_block_len: usize,
    pub linear_complexity_min_blocks: usize,
    pub serial_m: usize,
    pub poker_m: usize,
    pub uniform_word_bits: usize,
    pub uniform_intervals: usize,
    pub max_subseries_word_bits: usize,
    pub max_subseries_len: usize,
    pub max_subseries_intervals: usize,
    pub extreme_word_bits: usize,
    pub parking_lot: ParkingLotCalibration,
}

impl Default for TestParams {
    fn default() -> Self {
        TestParams {
            block_frequency_len: 128,
            non_overlapping_template: "000000001".to_string(),
            non_overlapping_blocks: 8,
            overlapping_template_len: 9,
            overlapping_block_len: 1032,
            overlapping_blocks: None,
            maurer_block_len: None,
            maurer_init_blocks: None,
            linear_complexity_block_len: 500,
            linear_complexity_min_blocks: 200,
            serial_m: 5,
            poker_m: 4,
            uniform_word_bits: 8,
            uniform_intervals: 2,
            max_subseries_word_bits: 8,
            max_subseries_len: 3,
            max_subseries_intervals: 10,
            extreme_word_bits: 32,
            parking_lot: ParkingLotCalibration::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub alpha: f64,
    pub tests: Vec<TestId>,
    pub params: TestParams,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig { alpha: DEFAULT_ALPHA, tests: TestId::ALL.to_vec(), params: TestParams::default() }
    }
}

impl BatteryConfig {
    pub fn with_tests(tests: Vec<TestId>) -> Self {
        BatteryConfig { tests, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha = {} is not in (0, 1)", self.alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Ran(TestResult),
    Skipped { test: TestId, reason: String },
}

impl TestOutcome {
    pub fn test(&self) -> TestId {
        match self {
            TestOutcome::Ran(r) => r.test,
            TestOutcome::Skipped { test, .. } => *test,
        }
    }

    pub fn result(&self) -> Option<&TestResult> {
        match self {
            TestOutcome::Ran(r) => Some(r),
            TestOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BatteryMetadata {
    pub source: String,
    pub seed: Option<u64>,
    pub round: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub n: usize,
    pub alpha: f64,
    pub metadata: BatteryMetadata,
    pub outcomes: Vec<TestOutcome>,
}

impl BatteryReport {
    pub fn results(&self) -> impl Iterator<Item = &TestResult> {
        self.outcomes.iter().filter_map(TestOutcome::result)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestResult> {
        self.results().filter(|r| !r.pass)
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Runs one test with explicit parameters.
pub fn run_test(seq: &BitSequence, test: TestId, p: &TestParams) -> Result<TestResult, TestError> {
    need_bits(test.minimum_bits(), seq.len())?;
    match test {
        TestId::Frequency => frequency_monobit(seq),
        TestId::BlockFrequency => block_frequency(seq, p.block_frequency_len),
        TestId::Runs => runs_test(seq),
        TestId::LongestRun => longest_run(seq),
        TestId::Rank => rank_test(seq),
        TestId::NonOverlappingTemplate => {
            non_overlapping_template(seq, &p.non_overlapping_template, p.non_overlapping_blocks)
        }
        TestId::OverlappingTemplate => {
            overlapping_template(seq, p.overlapping_template_len, p.overlapping_block_len, p.overlapping_blocks)
        }
        TestId::MaurerUniversal => maurer_universal(seq, p.maurer_block_len, p.maurer_init_blocks),
        TestId::LinearComplexity => {
            linear_complexity(seq, p.linear_complexity_block_len, p.linear_complexity_min_blocks)
        }
        TestId::Serial => serial_test(seq, p.serial_m),
        TestId::CumulativeSumsForward => cumulative_sums(seq, CusumDirection::Forward),
        TestId::CumulativeSumsBackward => cumulative_sums(seq, CusumDirection::Backward),
        TestId::CountTheOnes => count_the_ones(seq),
        TestId::ParkingLot => parking_lot(seq, &p.parking_lot),
        TestId::Poker => poker_test(seq, p.poker_m),
        TestId::UniformDistribution => uniform_distribution(seq, p.uniform_word_bits, p.uniform_intervals),
        TestId::MaxSubseries => {
            max_subseries(seq, p.max_subseries_word_bits, p.max_subseries_len, p.max_subseries_intervals)
        }
        TestId::ExtremePoint => extreme_point(seq, p.extreme_word_bits),
    }
}

/// Evaluates every enabled test in [`TestId`] order. Tests that cannot run
/// on this input are reported as skipped with the reason.
pub fn run_battery(seq: &BitSequence, cfg: &BatteryConfig) -> BatteryReport {
    run_battery_with_metadata(seq, cfg, BatteryMetadata::default())
}

pub fn run_battery_with_metadata(seq: &BitSequence, cfg: &BatteryConfig, metadata: BatteryMetadata) -> BatteryReport {
    let mut tests = cfg.tests.clone();
    tests.sort();
    tests.dedup();
    let outcomes = tests
        .into_iter()
        .map(|test| match run_test(seq, test, &cfg.params) {
            Ok(r) => TestOutcome::Ran(r.with_alpha(cfg.alpha)),
            Err(e) => TestOutcome::Skipped { test, reason: e.to_string() },
        })
        .collect();
    BatteryReport { n: seq.len(), alpha: cfg.alpha, metadata, outcomes }
}
