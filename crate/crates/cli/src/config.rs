//! Experiment configuration.
//!
//! TOML is the primary encoding; a file ending in `.json` is read as JSON
//! with the same schema. Every field has a default, and the fully defaulted
//! configuration runs `selftest`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cqnls_core::dynamics::StepperConfig;
use cqnls_core::RadialGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { r_max: 32.0, n: 4095 }
    }
}

impl GridConfig {
    pub const fn new(r_max: f64, n: usize) -> Self {
        Self { r_max, n }
    }

    pub fn build(&self) -> cqnls_core::Result<std::sync::Arc<RadialGrid>> {
        RadialGrid::shared(self.r_max, self.n)
    }
}

/// Initial-data family name plus its numeric parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    /// Snapshot CSV for the `file` family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for InitialData {
    fn default() -> Self {
        Self::gaussian(0.1, 1.0)
    }
}

impl InitialData {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            family: "gaussian".into(),
            params: BTreeMap::from([("amplitude".into(), amplitude), ("width".into(), width)]),
            path: None,
        }
    }

    pub fn bubble(a: f64, lambda: f64, cutoff: f64) -> Self {
        Self {
            family: "truncated-bubble".into(),
            params: BTreeMap::from([
                ("a".into(), a),
                ("lambda".into(), lambda),
                ("cutoff".into(), cutoff),
            ]),
            path: None,
        }
    }

    pub fn file(path: impl Into<PathBuf>) -> Self {
        Self { family: "file".into(), params: BTreeMap::new(), path: Some(path.into()) }
    }

    /// `family(k=v, ...)`, used as the input descriptor in ledgers.
    pub fn descriptor(&self) -> String {
        let mut parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        if let Some(p) = &self.path {
            parts.push(format!("path={}", p.display()));
        }
        format!("{}({})", self.family, parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsConfig {
    /// Use the built-in large reference grid instead of `[grid]`.
    pub reference: bool,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self { reference: true }
    }
}

/// The K⁻ bubble run appended to the dichotomy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMinusPreset {
    pub enabled: bool,
    pub grid: GridConfig,
    pub lambda: f64,
    pub cutoff: f64,
    /// Amplitude search: first value and step.
    pub a_start: f64,
    pub a_step: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for KMinusPreset {
    fn default() -> Self {
        Self {
            enabled: true,
            grid: GridConfig::new(16.0, 8191),
            lambda: 16.0,
            cutoff: 10.0,
            a_start: 1.0,
            a_step: 0.01,
            dt: 1e-5,
            t_end: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Parameter of `[initial]` that is swept.
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub kminus: KMinusPreset,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            parameter: "amplitude".into(),
            start: 0.05,
            stop: 2.0,
            step: 0.05,
            kminus: KMinusPreset::default(),
        }
    }
}

impl SweepConfig {
    /// `start, start + step, ...` up to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as i64 + 1;
        (0..count.max(0)).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorawetzConfig {
    pub radius: f64,
    pub identity_grid: GridConfig,
    pub identity_dt: f64,
    pub identity_t_end: f64,
    /// Repeat the identity run at `dt/2`.
    pub refine: bool,
    pub average_grid: GridConfig,
    pub average_dt: f64,
    pub average_times: Vec<f64>,
    pub average_sponge: bool,
}

impl Default for MorawetzConfig {
    fn default() -> Self {
        Self {
            radius: 8.0,
            identity_grid: GridConfig::new(48.0, 8191),
            identity_dt: 1e-3,
            identity_t_end: 2.0,
            refine: true,
            average_grid: GridConfig::new(64.0, 4095),
            average_dt: 1e-2,
            average_times: vec![40.0, 80.0, 160.0],
            average_sponge: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeDecayConfig {
    pub grid: GridConfig,
    /// The sup-norm exponent is fitted on `[fit_start, fit_end]`.
    pub fit_start: f64,
    pub fit_end: f64,
    pub fit_samples: usize,
    /// Horizons for the `L⁴ₜL^∞ₓ` norm.
    pub horizons: Vec<f64>,
    /// Uniform sample spacing on `[0, 1]`; later samples grow geometrically.
    pub early_step: f64,
    pub growth: f64,
}

impl Default for FreeDecayConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::new(2048.0, 65535),
            fit_start: 10.0,
            fit_end: 80.0,
            fit_samples: 41,
            horizons: vec![10.0, 20.0, 40.0, 80.0],
            early_step: 5e-3,
            growth: 1.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub grid: GridConfig,
    pub initial: InitialData,
    pub stepper: StepperConfig,
    pub thresholds: ThresholdsConfig,
    pub sweep: SweepConfig,
    pub morawetz: MorawetzConfig,
    pub free_decay: FreeDecayConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: "selftest".into(),
            out_dir: None,
            seed: 42,
            workers: 1,
            grid: GridConfig::default(),
            initial: InitialData::default(),
            stepper: StepperConfig::default(),
            thresholds: ThresholdsConfig::default(),
            sweep: SweepConfig::default(),
            morawetz: MorawetzConfig::default(),
            free_decay: FreeDecayConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "invalid config at line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical TOML encoding.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: cqnls_core::Error| CliError::Config(e.to_string());
        self.grid.build().map_err(cfg)?;
        self.stepper.validate().map_err(cfg)?;
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 || self.stepper.snapshot_stride > i64::MAX as usize {
            return Err(CliError::Config("seed and snapshot_stride must fit in a signed 64-bit integer".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let s = &self.sweep;
        if !(s.step > 0.0 && s.stop >= s.start) {
            return Err(CliError::Config("sweep needs step > 0 and stop >= start".into()));
        }
        if self.morawetz.average_times.iter().any(|&t| !(t > 0.0)) {
            return Err(CliError::Config("morawetz.average_times must be positive".into()));
        }
        let fd = &self.free_decay;
        if !(fd.fit_start > 0.0 && fd.fit_end > fd.fit_start && fd.fit_samples >= 2) {
            return Err(CliError::Config("free_decay fit window is empty".into()));
        }
        if !(fd.early_step > 0.0 && fd.growth > 1.0) {
            return Err(CliError::Config("free_decay needs early_step > 0 and growth > 1".into()));
        }
        Ok(())
    }
}
