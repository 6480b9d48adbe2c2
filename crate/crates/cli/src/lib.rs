//! Experiment runner for the radial cubic-quintic NLS lab.

pub mod config;
pub mod error;
pub mod experiments;
pub mod families;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, EXIT_INVARIANT};
use crate::experiments::{experiment_registry, Check, Context, Report};

pub const OUT_ENV: &str = "CQNLS_OUT";

/// Command-line overrides on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// `--out`, then `out_dir` from the config, then `$CQNLS_OUT/<experiment>`,
/// then `cqnls-out/<experiment>`.
pub fn output_dir(cfg: &ExperimentConfig, cli_out: Option<&Path>, env_out: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.out_dir {
        return p.clone();
    }
    env_out.unwrap_or(Path::new("cqnls-out")).join(&cfg.experiment)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_sha256: String,
    pub version: String,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub checks: Vec<Check>,
}

pub struct Outcome {
    pub out_dir: PathBuf,
    pub report: Report,
    pub manifest: Manifest,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.failures() > 0 {
            EXIT_INVARIANT
        } else {
            0
        }
    }
}

/// Resolves the experiment, runs it and writes `config.toml` and
/// `manifest.json` next to its artifacts.
pub fn run(mut cfg: ExperimentConfig, ov: &Overrides) -> Result<Outcome, CliError> {
    if let Some(e) = &ov.experiment {
        cfg.experiment = e.clone();
    }
    if let Some(w) = ov.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let reg = experiment_registry();
    let exp = reg.get(&cfg.experiment).map_err(|e| CliError::Config(e.to_string()))?;
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let out_dir = output_dir(&cfg, ov.out.as_deref(), env_out.as_deref());
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("config.toml"), cfg.to_toml())?;

    let start = Instant::now();
    let ctx = Context { config: &cfg, out: &out_dir, workers: cfg.workers };
    let mut report = exp.run(&ctx)?;
    report.artifacts.insert(0, "config.toml".into());
    let manifest = Manifest {
        experiment: cfg.experiment.clone(),
        config_sha256: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: report.artifacts.clone(),
        checks: report.checks.clone(),
    };
    cqnls_core::io::write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(Outcome { out_dir, report, manifest })
}
