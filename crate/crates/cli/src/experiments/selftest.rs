//! Fast invariant suite on sampled data. Every line is a PASS/FAIL verdict.

use cqnls_core::dynamics::{evolve, StepperConfig};
use cqnls_core::functionals::{cutoff_identity_residual, radial_weighted_sup, report, gradient_norm_sq};
use cqnls_core::sampling::FieldSampler;
use cqnls_core::variational::{classify, coercivity_gap, scale_f12, ClassTag, Thresholds};
use cqnls_core::RadialGrid;

use super::{to_json, Check, Context, Experiment, Report};
use crate::error::CliError;

const SAMPLES: usize = 16;

pub fn checks(seed: u64) -> Result<Vec<Check>, CliError> {
    let grid = RadialGrid::shared(16.0, 8191)?;
    let th = Thresholds::reference();
    let mut s = FieldSampler::new(grid.clone(), seed);
    let fields: Vec<_> = (0..SAMPLES).map(|_| s.smooth()).collect();

    let mut worst_split = 0.0f64;
    let mut worst_sobolev = 0.0f64;
    let mut worst_radial = 0.0f64;
    let mut worst_cutoff = 0.0f64;
    let mut gap_bad = 0;
    let mut scale_bad = 0;
    for u in &fields {
        let f = report(u);
        let scale = f.energy.abs().max(1e-300);
        worst_split = worst_split.max((f.energy - f.h - f.k / 6.0).abs() / scale);
        worst_sobolev = worst_sobolev.max(f.l6 / (th.w_l6 / th.grad_w_sq.powi(3) * f.kinetic.powi(3)));
        let kin = gradient_norm_sq(u);
        worst_radial = worst_radial.max(radial_weighted_sup(u).powi(2) / (f.mass.sqrt() * kin.sqrt()));
        worst_cutoff = worst_cutoff.max(cutoff_identity_residual(u, 4.0));
        if classify(u, &th).tag == ClassTag::KPlus {
            if coercivity_gap(u) < 0.75 * kin - 1e-9 * kin {
                gap_bad += 1;
            }
            let g = scale_f12(u, 0.5)?;
            if report(&g).energy > f.energy * (1.0 + 1e-6) {
                scale_bad += 1;
            }
        }
    }

    let u0 = fields[0].clone();
    let cfg = StepperConfig { dt: 1e-3, t_end: 0.2, snapshot_stride: usize::MAX / 2, ..StepperConfig::default() };
    let (traj, _) = evolve(&u0, &cfg)?;
    let m0 = traj.series[0].mass;
    let drift = traj.series.iter().map(|r| (r.mass - m0).abs() / m0).fold(0.0, f64::max);

    Ok(vec![
        Check::new("energy-splits", worst_split <= 1e-12, format!("max |E - H - K/6|/|E| = {worst_split:.2e}")),
        Check::new("sharp-sobolev", worst_sobolev <= 1.0 + 1e-6, format!("max ratio {worst_sobolev:.4}")),
        Check::new("radial-sobolev", worst_radial <= 0.3, format!("max ratio {worst_radial:.4}")),
        Check::new("cutoff-identity", worst_cutoff <= 1e-4, format!("max residual {worst_cutoff:.2e}")),
        Check::new("kplus-coercivity", gap_bad == 0, format!("{gap_bad} samples below 3/4 of kinetic")),
        Check::new("kplus-scaling-energy", scale_bad == 0, format!("{scale_bad} samples with E increasing")),
        Check::new("mass-conservation", drift <= 1e-10, format!("relative drift {drift:.2e} on [0, 0.2]")),
    ])
}

pub struct SelfTest;

impl Experiment for SelfTest {
    fn name(&self) -> &'static str {
        "selftest"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let checks = checks(ctx.config.seed)?;
        for c in &checks {
            println!("{}", c.line());
        }
        Ok(Report { summary: to_json(&checks), checks, artifacts: vec![] })
    }
}
