use cqnls_core::dynamics::{evolve, OutcomeTag, RunOutcome, StepperConfig};
use cqnls_core::io::{write_json, write_trajectory};
use cqnls_core::variational::{classify, cubic_barrier, measured_delta0, ClassTag, Classification, Thresholds};
use cqnls_core::Trajectory;
use serde::Serialize;

use super::{to_json, Check, Context, Experiment, Report};
use crate::error::CliError;
use crate::families::build_initial;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Drift {
    /// `max_t |mass(t) - mass(0)| / mass(0)` divided by the run length.
    pub mass_per_time: f64,
    pub energy_per_time: f64,
    pub max_y_ratio: f64,
}

pub fn drift(traj: &Trajectory, th: &Thresholds) -> Drift {
    let s0 = &traj.series[0];
    let span = traj.final_time().max(f64::MIN_POSITIVE);
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    let finite = traj.series.iter().filter(|s| s.mass.is_finite());
    let (mut dm, mut de, mut y) = (0.0f64, 0.0f64, 0.0f64);
    for s in finite {
        dm = dm.max(rel(s.mass, s0.mass));
        de = de.max(rel(s.energy, s0.energy));
        y = y.max(s.kinetic / th.grad_w_sq);
    }
    Drift { mass_per_time: dm / span, energy_per_time: de / span, max_y_ratio: y }
}

/// The coercivity ceiling `y(t) < 1` and the cubic-barrier bound for runs
/// starting in `K⁺`; empty for other data or when the sponge is on.
pub fn ceiling_checks(
    traj: &Trajectory,
    class: &Classification,
    th: &Thresholds,
    cfg: &StepperConfig,
) -> Vec<Check> {
    if class.tag != ClassTag::KPlus || cfg.sponge {
        return vec![];
    }
    let d = drift(traj, th);
    let mut out = vec![Check::new(
        "coercivity-ceiling",
        d.max_y_ratio < 1.0,
        format!("max y(t) = {:.6e}", d.max_y_ratio),
    )];
    let y0 = traj.series[0].kinetic / th.grad_w_sq;
    let delta0 = measured_delta0(traj.series[0].energy, th);
    out.push(match cubic_barrier(y0, delta0) {
        Ok(ybar) => Check::new(
            "cubic-barrier",
            d.max_y_ratio < ybar,
            format!("max y(t) = {:.9e} vs barrier {ybar:.9e} (δ₀ = {delta0:.6})", d.max_y_ratio),
        ),
        Err(e) => Check::new("cubic-barrier", false, e.to_string()),
    });
    out
}

/// The defining implications of the outcome tags.
pub fn outcome_checks(out: &RunOutcome, cfg: &StepperConfig) -> Vec<Check> {
    let mut v = vec![];
    match out.tag {
        OutcomeTag::BlewUp => v.push(Check::new(
            "blowup-evidence",
            out.evidence.max_kinetic_ratio >= cfg.blowup_gradient_factor,
            format!("max kinetic ratio {:.3}", out.evidence.max_kinetic_ratio),
        )),
        OutcomeTag::Scattered => v.push(Check::new(
            "evacuation-evidence",
            out.evidence.min_local_l6 <= cfg.evacuation.epsilon.powi(6),
            format!("late min local L⁶ {:.3e}", out.evidence.min_local_l6),
        )),
        OutcomeTag::Undecided => {}
    }
    v
}

#[derive(Debug, Clone, Serialize)]
struct EvolveSummary {
    classification: Classification,
    outcome: RunOutcome,
    drift: Drift,
    steps: usize,
    snapshots: usize,
}

pub struct Evolve;

impl Experiment for Evolve {
    fn name(&self) -> &'static str {
        "evolve"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let cfg = ctx.config;
        let u0 = build_initial(cfg.grid.build()?, &cfg.initial)?;
        let th = Thresholds::reference();
        let class = classify(&u0, &th);
        let (traj, outcome) = evolve(&u0, &cfg.stepper)?;
        write_trajectory(ctx.out, &traj)?;
        write_json(&ctx.path("outcome.json"), &outcome)?;
        let mut checks = ceiling_checks(&traj, &class, &th, &cfg.stepper);
        checks.extend(outcome_checks(&outcome, &cfg.stepper));
        println!("{} -> {} (t_event = {:?})", class.tag, outcome.tag, outcome.t_event);
        let summary = EvolveSummary {
            classification: class,
            drift: drift(&traj, &th),
            outcome,
            steps: traj.series.len() - 1,
            snapshots: traj.snapshots.len(),
        };
        let mut artifacts = vec!["series.csv".to_string(), "outcome.json".to_string()];
        for i in 0..traj.snapshots.len() {
            artifacts.push(format!("snapshot_{i:05}.csv"));
            artifacts.push(format!("snapshot_{i:05}.json"));
        }
        Ok(Report { summary: to_json(&summary), checks, artifacts })
    }
}
