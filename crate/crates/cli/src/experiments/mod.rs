//! Runnable studies, registered by name.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cqnls_core::registry::Registry;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub mod classify;
pub mod evolve;
pub mod free_decay;
pub mod morawetz;
pub mod selftest;
pub mod sweep;
pub mod thresholds;

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub out: &'a Path,
    pub workers: usize,
}

impl Context<'_> {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// One invariant verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Result<Report, CliError>;
}

pub fn experiment_registry() -> Registry<dyn Experiment> {
    let mut reg: Registry<dyn Experiment> = Registry::new("experiment");
    for e in [
        Arc::new(thresholds::Thresholds) as Arc<dyn Experiment>,
        Arc::new(classify::Classify),
        Arc::new(evolve::Evolve),
        Arc::new(sweep::DichotomySweep),
        Arc::new(morawetz::Morawetz),
        Arc::new(free_decay::FreeDecay),
        Arc::new(selftest::SelfTest),
    ] {
        reg.register(e.name(), e);
    }
    reg
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report values serialize")
}
