//! Run configuration echoed into every report.

use std::path::PathBuf;

use qkdrand_core::battery::BatteryConfig;
use qkdrand_core::{BitFormat, PipelineConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: BitFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub strict: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Present for `simulate`.
    pub pipeline: Option<PipelineConfig>,
    /// Present for `test`.
    pub input: Option<InputSpec>,
    pub battery: BatteryConfig,
    pub outputs: OutputSpec,
}

impl RunConfig {
    /// Checks every precondition that can be checked before running.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(p) = &self.pipeline {
            p.validate().map_err(|e| e.to_string())?;
        }
        self.battery.validate()
    }
}
