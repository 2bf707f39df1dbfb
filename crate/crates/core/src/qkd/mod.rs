//! Seedable simulation of the BB84 key-distillation pipeline: photon
//! preparation, a noisy and possibly tapped channel, measurement, sifting,
//! error estimation, Cascade-style reconciliation and Toeplitz privacy
//! amplification.
//!
//! Every random choice is drawn from a ChaCha8 stream seeded explicitly, so a
//! run is a pure function of its configuration and seeds.

mod channel;
mod estimate;
mod pipeline;
mod privacy;
mod reconcile;
mod sift;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{generate_photons, transmit_and_measure, transmit_and_measure_with, Measurement};
pub use estimate::{estimate_qber, QberEstimate, QberOutcome};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport, RoundCounts, RoundRecord, RoundSeeds};
pub use privacy::{privacy_amplify, toeplitz_diagonals, toeplitz_hash, PaParams};
pub use reconcile::{reconcile, BlockSchedule, ReconConfig, ReconResult};
pub use sift::sift;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkdError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("key too short for error estimation: {len} bits (need at least {min})")]
    KeyTooShort { len: usize, min: usize },
    #[error("privacy amplification output length L - M - s = {l} - {m} - {s} is not positive")]
    NonPositiveOutputLength { l: usize, m: usize, s: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Polarization filter type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    #[inline]
    pub(crate) fn from_bit(b: bool) -> Self {
        if b {
            Basis::Diagonal
        } else {
            Basis::Rectilinear
        }
    }
}

/// One pumped photon. `lost` and `eve_measured_basis` are filled in by the
/// channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonRecord {
    pub bit: bool,
    pub prep_basis: Basis,
    pub lost: bool,
    pub eve_measured_basis: Option<Basis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "fraction")]
pub enum Eavesdropper {
    None,
    /// Intercept the given fraction of photons, measure in a random basis and
    /// resend the result in that basis.
    InterceptResend(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub flip_prob: f64,
    pub loss_prob: f64,
    pub eve: Eavesdropper,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig { flip_prob: 0.03, loss_prob: 0.0, eve: Eavesdropper::None }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), QkdError> {
        check_probability("flip_prob", self.flip_prob)?;
        check_probability("loss_prob", self.loss_prob)?;
        if let Eavesdropper::InterceptResend(f) = self.eve {
            check_probability("intercept fraction", f)?;
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), QkdError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QkdError::InvalidConfig(format!("{name} = {p} is not in [0, 1]")))
    }
}

/// SplitMix64 finalizer; derives independent stream seeds from a master seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut z = master;
    for &t in tags {
        z = mix(z ^ mix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    z
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
