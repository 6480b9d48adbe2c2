//! Initial-data families, registered by name.

use std::sync::Arc;

use cqnls_core::registry::Registry;
use cqnls_core::variational::truncated_bubble;
use cqnls_core::{io, Error, RadialField, RadialGrid, Result};

use crate::config::InitialData;

pub trait InitialDataFamily: Send + Sync {
    fn name(&self) -> &'static str;
    /// Accepted keys of `params`, with their defaults.
    fn params(&self) -> &'static [(&'static str, f64)];
    fn build(&self, grid: Arc<RadialGrid>, spec: &InitialData) -> Result<RadialField>;
}

/// Checks for unknown keys and returns `params` merged over the defaults.
fn resolve(family: &dyn InitialDataFamily, spec: &InitialData) -> Result<Vec<f64>> {
    if let Some(k) = spec.params.keys().find(|k| !family.params().iter().any(|(p, _)| p == k)) {
        let known: Vec<&str> = family.params().iter().map(|p| p.0).collect();
        return Err(Error::Domain(format!(
            "family `{}` has no parameter `{k}` (expected one of {known:?})",
            family.name()
        )));
    }
    Ok(family
        .params()
        .iter()
        .map(|(k, d)| spec.params.get(*k).copied().unwrap_or(*d))
        .collect())
}

/// `amplitude · exp(-(r/width)²)`.
pub struct Gaussian;

impl InitialDataFamily for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn params(&self) -> &'static [(&'static str, f64)] {
        &[("amplitude", 0.1), ("width", 1.0)]
    }
    fn build(&self, grid: Arc<RadialGrid>, spec: &InitialData) -> Result<RadialField> {
        let p = resolve(self, spec)?;
        let (a, w) = (p[0], p[1]);
        if !(w > 0.0) {
            return Err(Error::Domain(format!("gaussian width must be positive, got {w}")));
        }
        Ok(RadialField::from_real_fn(grid, |r| a * (-(r / w).powi(2)).exp())?.with_label(spec.descriptor()))
    }
}

/// `a λ^{1/2} W(λr) χ_R(r)`.
pub struct TruncatedBubble;

impl InitialDataFamily for TruncatedBubble {
    fn name(&self) -> &'static str {
        "truncated-bubble"
    }
    fn params(&self) -> &'static [(&'static str, f64)] {
        &[("a", 1.0), ("lambda", 1.0), ("cutoff", 10.0)]
    }
    fn build(&self, grid: Arc<RadialGrid>, spec: &InitialData) -> Result<RadialField> {
        let p = resolve(self, spec)?;
        if !(p[1] > 0.0 && p[2] > 0.0) {
            return Err(Error::Domain("bubble needs lambda > 0 and cutoff > 0".into()));
        }
        if p[2] > grid.r_max() {
            return Err(Error::Domain(format!(
                "bubble cutoff {} exceeds r_max = {}",
                p[2],
                grid.r_max()
            )));
        }
        Ok(truncated_bubble(grid, p[0], p[1], p[2]))
    }
}

/// A snapshot file; its sidecar grid replaces `[grid]`.
pub struct FromFile;

impl InitialDataFamily for FromFile {
    fn name(&self) -> &'static str {
        "file"
    }
    fn params(&self) -> &'static [(&'static str, f64)] {
        &[]
    }
    fn build(&self, _grid: Arc<RadialGrid>, spec: &InitialData) -> Result<RadialField> {
        resolve(self, spec)?;
        let path = spec
            .path
            .as_ref()
            .ok_or_else(|| Error::Domain("family `file` needs `path`".into()))?;
        Ok(io::read_snapshot(path)?.0)
    }
}

pub fn family_registry() -> Registry<dyn InitialDataFamily> {
    let mut reg: Registry<dyn InitialDataFamily> = Registry::new("initial-data family");
    for f in [
        Arc::new(Gaussian) as Arc<dyn InitialDataFamily>,
        Arc::new(TruncatedBubble),
        Arc::new(FromFile),
    ] {
        reg.register(f.name(), f);
    }
    reg
}

/// Builds `spec` on `grid` through the default registry.
pub fn build_initial(grid: Arc<RadialGrid>, spec: &InitialData) -> Result<RadialField> {
    family_registry().get(&spec.family)?.build(grid, spec)
}
