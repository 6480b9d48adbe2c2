//! Dispersive decay of the free flow: the sup-norm exponent and the
//! discrete `L⁴ₜL^∞ₓ` norm on growing windows.

use std::fs;

use cqnls_core::functionals::time_norm;
use cqnls_core::io::write_json;
use cqnls_core::morawetz::log_log_slope;
use cqnls_core::{RadialField, SpectralPlan};
use serde::Serialize;

use super::{to_json, Check, Context, Experiment, Report};
use crate::config::FreeDecayConfig;
use crate::error::CliError;
use crate::families::build_initial;

pub const EXPONENT_BAND: (f64, f64) = (1.40, 1.60);
pub const SATURATION_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Fitted `p` in `‖u(t)‖_∞ ~ t^{-p}`; `None` for degenerate data.
    pub exponent: Option<f64>,
    pub degenerate: bool,
    pub horizons: Vec<f64>,
    /// `‖u‖_{L⁴ₜL^∞ₓ([0, T])}` for each horizon.
    pub norms: Vec<f64>,
}

/// Sample times: `early_step` spacing on `[0, 1]`, then a geometric ratio
/// `growth` up to `t_end`, with every horizon included exactly.
pub fn sample_times(cfg: &FreeDecayConfig, t_end: f64) -> Vec<f64> {
    let mut t = vec![];
    let n_early = (1.0f64.min(t_end) / cfg.early_step).round() as usize;
    t.extend((0..=n_early).map(|i| i as f64 * cfg.early_step));
    let mut x = *t.last().expect("non-empty");
    while x * cfg.growth < t_end {
        x *= cfg.growth;
        t.push(x);
    }
    t.extend(cfg.horizons.iter().copied().filter(|&h| h <= t_end));
    t.push(t_end);
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    t
}

pub fn study(u0: &RadialField, cfg: &FreeDecayConfig) -> DecayReport {
    let plan = SpectralPlan::new(u0.grid_arc().clone());
    let sup = |t: f64| plan.free_propagate(u0, t).expect("grid matches").max_abs();
    let fit_t: Vec<f64> = (0..cfg.fit_samples)
        .map(|i| cfg.fit_start * (cfg.fit_end / cfg.fit_start).powf(i as f64 / (cfg.fit_samples - 1) as f64))
        .collect();
    let degenerate = u0.is_zero();
    let exponent = if degenerate {
        None
    } else {
        let s: Vec<f64> = fit_t.iter().map(|&t| sup(t)).collect();
        log_log_slope(&fit_t, &s).ok().map(|p| -p)
    };
    let t_end = cfg.horizons.iter().copied().fold(0.0, f64::max);
    let times = sample_times(cfg, t_end);
    let sups: Vec<f64> = if degenerate { vec![0.0; times.len()] } else { times.iter().map(|&t| sup(t)).collect() };
    let norms = cfg
        .horizons
        .iter()
        .map(|&h| {
            let k = times.iter().take_while(|&&t| t <= h * (1.0 + 1e-12)).count();
            time_norm(&times[..k], &sups[..k], 4.0)
        })
        .collect();
    DecayReport { exponent, degenerate, horizons: cfg.horizons.clone(), norms }
}

pub fn checks(r: &DecayReport) -> Vec<Check> {
    let (lo, hi) = EXPONENT_BAND;
    let mut v = vec![match r.exponent {
        Some(p) => Check::new("decay-exponent", (lo..=hi).contains(&p), format!("exponent {p:.4}")),
        None => Check::new("decay-exponent", r.degenerate, "degenerate fit (zero data)"),
    }];
    let monotone = r.norms.windows(2).all(|w| w[1] >= w[0]);
    v.push(Check::new("l4-linf-nondecreasing", monotone, format!("norms {:?}", r.norms)));
    let at = |h: f64| r.horizons.iter().position(|&x| x == h).map(|i| r.norms[i]);
    if let (Some(a), Some(b)) = (at(40.0), at(80.0)) {
        let rel = if b == 0.0 { 0.0 } else { (b - a).abs() / b };
        v.push(Check::new(
            "l4-linf-saturates",
            rel <= SATURATION_TOLERANCE,
            format!("|N(80) - N(40)|/N(80) = {rel:.3e}"),
        ));
    }
    v
}

pub struct FreeDecay;

impl Experiment for FreeDecay {
    fn name(&self) -> &'static str {
        "free-decay"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let cfg = ctx.config;
        let u0 = build_initial(cfg.free_decay.grid.build()?, &cfg.initial)?;
        let r = study(&u0, &cfg.free_decay);
        write_json(&ctx.path("free_decay.json"), &r)?;
        let mut csv = String::from("T,l4_linf\n");
        for (h, n) in r.horizons.iter().zip(&r.norms) {
            csv.push_str(&format!("{h:e},{n:e}\n"));
        }
        fs::write(ctx.path("free_decay.csv"), csv)?;
        let checks = checks(&r);
        for c in &checks {
            println!("{}", c.line());
        }
        Ok(Report {
            summary: to_json(&r),
            checks,
            artifacts: vec!["free_decay.json".into(), "free_decay.csv".into()],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqnls_core::RadialGrid;

    fn small() -> FreeDecayConfig {
        FreeDecayConfig { horizons: vec![1.0, 2.0], fit_start: 0.5, fit_end: 2.0, fit_samples: 5, ..Default::default() }
    }

    #[test]
    fn zero_data_is_degenerate() {
        let g = RadialGrid::shared(32.0, 255).unwrap();
        let r = study(&RadialField::zeros(g), &small());
        assert!(r.degenerate && r.exponent.is_none());
        assert_eq!(r.norms, vec![0.0, 0.0]);
        assert!(checks(&r).iter().all(|c| c.passed));
    }

    #[test]
    fn sample_times_cover_horizons() {
        let cfg = FreeDecayConfig { horizons: vec![3.0, 7.5], ..small() };
        let t = sample_times(&cfg, 7.5);
        assert_eq!(t[0], 0.0);
        assert!(t.contains(&3.0) && *t.last().unwrap() == 7.5);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}
