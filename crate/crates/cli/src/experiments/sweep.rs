//! The dichotomy sweep: classification and outcome along a one-parameter
//! family, plus a tuned K⁻ bubble.

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cqnls_core::dynamics::{evolve, OutcomeTag, StepperConfig};
use cqnls_core::io::write_json;
use cqnls_core::variational::{classify, tune_kminus_amplitude, ClassTag, Thresholds};
use serde::Serialize;

use super::{to_json, Check, Context, Experiment, Report};
use crate::config::{ExperimentConfig, InitialData};
use crate::error::CliError;
use crate::families::build_initial;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub value: f64,
    pub class: ClassTag,
    pub outcome: OutcomeTag,
    pub energy: f64,
    pub k: f64,
    pub y_ratio: f64,
    pub t_event: Option<f64>,
    pub min_local_l6: f64,
    pub max_kinetic_ratio: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "label,value,class,outcome,energy,k,y_ratio,t_event,min_local_l6,max_kinetic_ratio";

    pub fn csv(&self) -> String {
        format!(
            "{},{:e},{},{},{:e},{:e},{:e},{},{:e},{:e}",
            self.label,
            self.value,
            self.class.as_str(),
            self.outcome,
            self.energy,
            self.k,
            self.y_ratio,
            self.t_event.map(|t| format!("{t:e}")).unwrap_or_default(),
            self.min_local_l6,
            self.max_kinetic_ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SweepRow::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    /// Invariant verdicts for the dichotomy.
    pub fn checks(&self) -> Vec<Check> {
        let kplus_bad: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.class == ClassTag::KPlus && r.outcome == OutcomeTag::BlewUp)
            .map(|r| r.value)
            .collect();
        let kminus: Vec<&SweepRow> = self.rows.iter().filter(|r| r.class == ClassTag::KMinus).collect();
        let kminus_bad: Vec<f64> = kminus
            .iter()
            .filter(|r| r.outcome != OutcomeTag::BlewUp || r.t_event.is_none())
            .map(|r| r.value)
            .collect();
        let scattered = self.rows.iter().filter(|r| r.outcome == OutcomeTag::Scattered).count();
        let blown = kminus.iter().filter(|r| r.outcome == OutcomeTag::BlewUp).count();
        vec![
            Check::new("kplus-never-blows-up", kplus_bad.is_empty(), format!("violations at {kplus_bad:?}")),
            Check::new(
                "kminus-blows-up",
                kminus_bad.is_empty(),
                format!("{} K⁻ rows, violations at {kminus_bad:?}", kminus.len()),
            ),
            Check::new("confirmed-scattered", scattered > 0, format!("{scattered} Scattered rows")),
            Check::new("confirmed-blowup", blown > 0, format!("{blown} K⁻ rows BlewUp")),
        ]
    }

    /// Whether `E(u₀)` increases strictly along the swept rows; returns the
    /// offending values otherwise.
    pub fn energy_monotone(&self, label: &str) -> Vec<f64> {
        let rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.label == label).collect();
        rows.windows(2).filter(|w| w[1].energy <= w[0].energy).map(|w| w[1].value).collect()
    }
}

fn run_point(label: &str, value: f64, u0: &cqnls_core::RadialField, cfg: &StepperConfig, th: &Thresholds)
    -> cqnls_core::Result<SweepRow>
{
    let c = classify(u0, th);
    let (_, out) = evolve(u0, cfg)?;
    Ok(SweepRow {
        label: label.to_string(),
        value,
        class: c.tag,
        outcome: out.tag,
        energy: c.report.energy,
        k: c.report.k,
        y_ratio: c.report.y_ratio,
        t_event: out.t_event,
        min_local_l6: out.evidence.min_local_l6,
        max_kinetic_ratio: out.evidence.max_kinetic_ratio,
    })
}

/// Runs every sweep point on up to `workers` threads. Rows are stored by
/// point index, so the result does not depend on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepResult, CliError> {
    let th = Thresholds::reference();
    let grid = cfg.grid.build()?;
    let label = cfg.initial.family.clone();
    let mut jobs: Vec<(String, f64, InitialData)> = cfg
        .sweep
        .values()
        .into_iter()
        .map(|v| {
            let mut spec = cfg.initial.clone();
            spec.params.insert(cfg.sweep.parameter.clone(), v);
            (label.clone(), v, spec)
        })
        .collect();
    let km = &cfg.sweep.kminus;
    if km.enabled {
        let g = km.grid.build()?;
        let a = tune_kminus_amplitude(g, km.lambda, km.cutoff, &th, km.a_start, km.a_step)?;
        jobs.push(("kminus-bubble".into(), a, InitialData::bubble(a, km.lambda, km.cutoff)));
    }
    let stepper_for = |label: &str| -> StepperConfig {
        if label == "kminus-bubble" {
            StepperConfig {
                dt: km.dt,
                t_end: km.t_end,
                sponge: false,
                evacuation: cfg.stepper.evacuation,
                ..cfg.stepper.clone()
            }
        } else {
            cfg.stepper.clone()
        }
    };
    // snapshots are not kept by sweep points
    let stride = usize::MAX / 2;

    let slots: Vec<Mutex<Option<cqnls_core::Result<SweepRow>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((label, value, spec)) = jobs.get(i) else { break };
                let res = (|| {
                    let g = if label == "kminus-bubble" { km.grid.build()? } else { grid.clone() };
                    let u0 = build_initial(g, spec)?;
                    let mut sc = stepper_for(label);
                    sc.snapshot_stride = stride;
                    if sc.evacuation.radius > u0.grid().r_max() {
                        sc.evacuation.radius = u0.grid().r_max();
                    }
                    run_point(label, *value, &u0, &sc, &th)
                })();
                *slots[i].lock().expect("slot lock") = Some(res);
            });
        }
    });
    let rows = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every job ran"))
        .collect::<cqnls_core::Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

pub struct DichotomySweep;

impl Experiment for DichotomySweep {
    fn name(&self) -> &'static str {
        "dichotomy-sweep"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let res = run_sweep(ctx.config, ctx.workers)?;
        fs::write(ctx.path("sweep.csv"), res.to_csv())?;
        write_json(&ctx.path("sweep.json"), &res)?;
        for r in &res.rows {
            println!("{} {:.4} {} -> {}", r.label, r.value, r.class.as_str(), r.outcome);
        }
        let mut checks = res.checks();
        let bad = res.energy_monotone(&ctx.config.initial.family);
        if !bad.is_empty() {
            eprintln!("warning: E(u₀) is not strictly increasing at {bad:?}");
        }
        checks.push(Check::new(
            "energy-increasing",
            bad.is_empty(),
            if bad.is_empty() { "E(u₀) strictly increasing".into() } else { format!("flagged at {bad:?}") },
        ));
        Ok(Report {
            summary: to_json(&res),
            checks,
            artifacts: vec!["sweep.csv".into(), "sweep.json".into()],
        })
    }
}
