use std::fs;

use cqnls_core::dynamics::{evolve, flux_identity_residual, Probes, StepperConfig};
use cqnls_core::io::write_json;
use cqnls_core::morawetz::{averaged_local_l6, identity_residual, log_log_slope, weight_build, MorawetzSeries};
use cqnls_core::RadialField;
use serde::Serialize;

use super::{to_json, Check, Context, Experiment, Report};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::families::build_initial;

/// Allowed identity residual at the base step.
pub const IDENTITY_TOLERANCE: f64 = 1e-2;
/// Band for the log-log slope of the averaged local L⁶ mass.
pub const SLOPE_BAND: (f64, f64) = (-0.85, -0.45);

#[derive(Debug, Clone, Serialize)]
pub struct IdentityStudy {
    pub radius: f64,
    pub dt: Vec<f64>,
    pub residual: Vec<f64>,
    pub flux_residual: Vec<f64>,
    #[serde(skip)]
    pub series: MorawetzSeries,
}

fn initial(cfg: &ExperimentConfig, grid: &crate::config::GridConfig) -> Result<RadialField, CliError> {
    Ok(build_initial(grid.build()?, &cfg.initial)?)
}

/// Evolves `[initial]` with per-step Morawetz and flux probes at `dt` and,
/// when `refine` is set, at `dt/2`.
pub fn identity_study(cfg: &ExperimentConfig) -> Result<IdentityStudy, CliError> {
    let m = &cfg.morawetz;
    let u0 = initial(cfg, &m.identity_grid)?;
    let w = weight_build(m.radius)?;
    let dts: Vec<f64> = if m.refine { vec![m.identity_dt, m.identity_dt / 2.0] } else { vec![m.identity_dt] };
    let mut residual = vec![];
    let mut flux_residual = vec![];
    let mut first = None;
    for &dt in &dts {
        let sc = StepperConfig {
            dt,
            t_end: m.identity_t_end,
            sponge: false,
            snapshot_stride: usize::MAX / 2,
            probes: Probes { morawetz_radius: Some(m.radius), flux_radius: Some(m.radius), extra_radii: vec![] },
            evacuation: cqnls_core::dynamics::Evacuation {
                radius: cfg.stepper.evacuation.radius.min(u0.grid().r_max()),
                ..cfg.stepper.evacuation
            },
            ..cfg.stepper.clone()
        };
        let (traj, _) = evolve(&u0, &sc)?;
        residual.push(identity_residual(&traj, &w).value);
        flux_residual.push(flux_identity_residual(&traj, m.radius).value);
        if first.is_none() {
            first = Some(MorawetzSeries::from_trajectory(&traj, &w));
        }
    }
    Ok(IdentityStudy { radius: m.radius, dt: dts, residual, flux_residual, series: first.expect("one run") })
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragePoint {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub average: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageStudy {
    pub points: Vec<AveragePoint>,
    pub fit_slope: Option<f64>,
}

/// One run to the largest `T`, with `R = T^{1/3}` probes for every horizon.
pub fn average_study(cfg: &ExperimentConfig) -> Result<AverageStudy, CliError> {
    let m = &cfg.morawetz;
    let u0 = initial(cfg, &m.average_grid)?;
    let mut times = m.average_times.clone();
    times.sort_by(f64::total_cmp);
    let radii: Vec<f64> = times.iter().map(|t| t.cbrt()).collect();
    let t_end = *times.last().expect("validated non-empty");
    let sc = StepperConfig {
        dt: m.average_dt,
        t_end,
        sponge: m.average_sponge,
        snapshot_stride: usize::MAX / 2,
        probes: Probes { extra_radii: radii.clone(), ..Probes::default() },
        evacuation: cqnls_core::dynamics::Evacuation {
            radius: cfg.stepper.evacuation.radius.min(u0.grid().r_max()),
            ..cfg.stepper.evacuation
        },
        ..cfg.stepper.clone()
    };
    let (traj, _) = evolve(&u0, &sc)?;
    let points = times
        .iter()
        .zip(&radii)
        .map(|(&t, &r)| Ok(AveragePoint { t, r, average: averaged_local_l6(&traj.truncated(t), r)? }))
        .collect::<cqnls_core::Result<Vec<_>>>()?;
    let avgs: Vec<f64> = points.iter().map(|p| p.average).collect();
    let fit_slope = log_log_slope(&times, &avgs).ok();
    Ok(AverageStudy { points, fit_slope })
}

pub fn identity_checks(s: &IdentityStudy) -> Vec<Check> {
    let mut v = vec![Check::new(
        "morawetz-identity",
        s.residual[0] <= IDENTITY_TOLERANCE,
        format!("residual {:.3e} at dt = {}", s.residual[0], s.dt[0]),
    )];
    if s.residual.len() > 1 {
        v.push(Check::new(
            "morawetz-identity-refines",
            s.residual[1] < s.residual[0],
            format!("{:.3e} -> {:.3e} under dt-halving", s.residual[0], s.residual[1]),
        ));
    }
    v.push(Check::new(
        "flux-identity",
        s.flux_residual[0] <= IDENTITY_TOLERANCE,
        format!("residual {:.3e}", s.flux_residual[0]),
    ));
    v
}

pub fn average_check(a: &AverageStudy) -> Check {
    let (lo, hi) = SLOPE_BAND;
    match a.fit_slope {
        Some(s) => Check::new(
            "averaged-local-l6-slope",
            (lo..=hi).contains(&s),
            format!("slope {s:.4}, band [{lo}, {hi}]"),
        ),
        None => Check::new("averaged-local-l6-slope", false, "degenerate fit"),
    }
}

#[derive(Debug, Clone, Serialize)]
struct AveragedJson {
    #[serde(rename = "T")]
    t: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    average: Vec<f64>,
    fit_slope: Option<f64>,
}

pub struct Morawetz;

impl Experiment for Morawetz {
    fn name(&self) -> &'static str {
        "morawetz"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let cfg = ctx.config;
        let id = identity_study(cfg)?;
        fs::write(ctx.path("morawetz.csv"), id.series.to_csv())?;
        write_json(&ctx.path("identity.json"), &id)?;
        let avg = average_study(cfg)?;
        let out = AveragedJson {
            t: avg.points.iter().map(|p| p.t).collect(),
            r: avg.points.iter().map(|p| p.r).collect(),
            average: avg.points.iter().map(|p| p.average).collect(),
            fit_slope: avg.fit_slope,
        };
        write_json(&ctx.path("averaged.json"), &out)?;
        let mut checks = identity_checks(&id);
        checks.push(average_check(&avg));
        for c in &checks {
            println!("{}", c.line());
        }
        Ok(Report {
            summary: serde_json::json!({ "identity": to_json(&id), "averaged": to_json(&out) }),
            checks,
            artifacts: vec!["morawetz.csv".into(), "identity.json".into(), "averaged.json".into()],
        })
    }
}
