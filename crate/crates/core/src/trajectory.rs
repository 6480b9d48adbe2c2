use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;

/// Morawetz action and the three groups of its time derivative at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzProbe {
    pub m: f64,
    pub main: f64,
    pub err1: f64,
    pub err2: f64,
}

impl MorawetzProbe {
    pub fn rate(&self) -> f64 {
        self.main + self.err1 + self.err2
    }
}

/// `∫χ_R|u|⁶` and the two terms of its exact time derivative at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxProbe {
    pub chi_l6: f64,
    /// `6∫|u|⁴ ∇χ_R · Im(ū∇u)`
    pub boundary: f64,
    /// `6∫χ_R ∇|u|⁴ · Im(ū∇u)`
    pub interior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
    /// `∫_{r<=R}|u|⁶` at the evacuation radius.
    pub l6_local: f64,
    /// Local L⁶ mass at every extra probe radius, in configuration order.
    pub l6_extra: Vec<f64>,
    pub morawetz: Option<MorawetzProbe>,
    pub flux: Option<FluxProbe>,
    pub tail_fraction: Option<f64>,
}

impl StepRecord {
    pub fn zero(t: f64, extra: usize) -> Self {
        Self {
            t,
            mass: 0.0,
            energy: 0.0,
            kinetic: 0.0,
            l6_local: 0.0,
            l6_extra: vec![0.0; extra],
            morawetz: None,
            flux: None,
            tail_fraction: None,
        }
    }
}

/// Strided snapshots plus per-step diagnostic records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialField>,
    pub series: Vec<StepRecord>,
    /// Radius of the `l6_local` column.
    pub local_radius: Option<f64>,
    /// Radii of the `l6_extra` columns.
    pub extra_radii: Vec<f64>,
    /// Radius used for `morawetz` probes, when recorded.
    pub morawetz_radius: Option<f64>,
    /// Radius used for `flux` probes, when recorded.
    pub flux_radius: Option<f64>,
    /// Snapshot stride in steps.
    pub stride: usize,
}

impl Trajectory {
    /// Trajectory holding the same field at every listed time.
    pub fn constant(field: RadialField, times: Vec<f64>) -> Self {
        let snapshots = times.iter().map(|_| field.clone()).collect();
        Self { times, snapshots, stride: 1, ..Default::default() }
    }

    pub fn from_snapshots(times: Vec<f64>, snapshots: Vec<RadialField>) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(Error::Contract("times and snapshots differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Contract("snapshot times must be strictly increasing".into()));
        }
        Ok(Self { times, snapshots, stride: 1, ..Default::default() })
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.series
            .last()
            .map(|s| s.t)
            .or_else(|| self.times.last().copied())
            .unwrap_or(0.0)
    }

    /// Snapshots restricted to `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> Trajectory {
        let keep = self.times.iter().take_while(|&&t| t <= t_max * (1.0 + 1e-12)).count();
        let keep_series = self.series.iter().take_while(|s| s.t <= t_max * (1.0 + 1e-12)).count();
        Trajectory {
            times: self.times[..keep].to_vec(),
            snapshots: self.snapshots[..keep].to_vec(),
            series: self.series[..keep_series].to_vec(),
            local_radius: self.local_radius,
            extra_radii: self.extra_radii.clone(),
            morawetz_radius: self.morawetz_radius,
            flux_radius: self.flux_radius,
            stride: self.stride,
        }
    }

    /// Checks snapshot spacing is uniform to a relative tolerance and returns it.
    pub fn uniform_spacing(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Ok(0.0);
        }
        let h = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::Contract("snapshots are not equally spaced in time".into()));
            }
        }
        Ok(h)
    }
}
