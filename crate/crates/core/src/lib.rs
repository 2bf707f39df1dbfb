//! BB84 key-distillation simulator with a statistical randomness battery
//! for scoring the distilled bits.
//!
//! * [`bitstream`]: packed bit sequences and their file formats.
//! * [`qkd`]: photon preparation, channel, sifting, error estimation,
//!   reconciliation and privacy amplification.
//! * [`stats`]: special functions, GF(2) rank and Berlekamp–Massey.
//! * [`battery`]: the randomness tests and the battery driver.

pub mod battery;
pub mod bitstream;
pub mod qkd;
pub mod stats;


pub use bitstream::{BitError, BitFormat, BitSequence};
pub use qkd::{run_pipeline, PipelineConfig, PipelineReport};
pub use battery::{run_battery, BatteryConfig, BatteryReport, TestId, TestOutcome, TestResult};
