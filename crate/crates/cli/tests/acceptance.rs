//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line and
//! then asserts it.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use cqnls_cli::config::{ExperimentConfig, GridConfig};
use cqnls_cli::experiments::evolve::{ceiling_checks, drift};
use cqnls_cli::experiments::{free_decay, morawetz, sweep, thresholds};
use cqnls_cli::families::build_initial;
use cqnls_core::dynamics::{evolve, StepperConfig};
use cqnls_core::functionals::report;
use cqnls_core::io::series_csv;
use cqnls_core::sampling::FieldSampler;
use cqnls_core::variational::{classify, scale_f12, scale_phi, ClassTag, Thresholds};
use cqnls_core::{RadialField, RadialGrid, SpectralPlan, Trajectory};

fn verdict(name: &str, passed: bool, detail: String) {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{name}: {detail}");
}

fn preset(name: &str) -> ExperimentConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&p).expect("preset loads")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian(grid: Arc<RadialGrid>, a: f64) -> RadialField {
    RadialField::from_real_fn(grid, move |r| a * (-r * r).exp()).unwrap()
}

#[test]
fn ground_state_identities() {
    const TARGET_GRAD: f64 = 2.1367;
    const TARGET_EC: f64 = 0.7122;
    let out = thresholds::compute(true, &GridConfig::default()).unwrap();
    let th = out.thresholds;
    let mutual = rel(th.w_l6, th.grad_w_sq);
    let to_target = rel(th.grad_w_sq, TARGET_GRAD).max(rel(th.w_l6, TARGET_GRAD));
    let ec = rel(th.ec_w, TARGET_EC);
    let pass = mutual <= 0.01 && to_target <= 0.01 && ec <= 0.01 && out.elliptic_residual <= 1e-5;
    verdict(
        "ground-state-identities",
        pass,
        format!(
            "|∇W|² = {:.5}, |W|₆⁶ = {:.5} (mutual {mutual:.2e}, vs {TARGET_GRAD}: {to_target:.2e}); \
             E^c(W) = {:.5} (vs {TARGET_EC}: {ec:.2e}); elliptic residual {:.2e}",
            th.grad_w_sq, th.w_l6, th.ec_w, out.elliptic_residual
        ),
    );
}

/// K⁺ runs with the sponge off, shared by the conservation and ceiling tests.
fn kplus_runs() -> &'static [(f64, Trajectory)] {
    static RUNS: OnceLock<Vec<(f64, Trajectory)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let g = RadialGrid::shared(128.0, 8191).unwrap();
        [0.1, 0.8]
            .into_iter()
            .map(|a| {
                let cfg = StepperConfig { dt: 1e-3, t_end: 10.0, snapshot_stride: 2000, ..Default::default() };
                (a, evolve(&gaussian(g.clone(), a), &cfg).unwrap().0)
            })
            .collect()
    })
}

#[test]
fn conservation() {
    let th = Thresholds::reference();
    let traj = &kplus_runs()[0].1;
    let d = drift(traj, &th);
    verdict(
        "conservation",
        d.mass_per_time <= 1e-10 && d.energy_per_time <= 1e-6,
        format!("mass drift {:.2e}/t, energy drift {:.2e}/t", d.mass_per_time, d.energy_per_time),
    );
}

#[test]
fn coercivity_ceiling() {
    let th = Thresholds::reference();
    let cfg = StepperConfig::default();
    let mut lines = vec![];
    let mut pass = true;
    for (a, traj) in kplus_runs() {
        let class = classify(&traj.snapshots[0], &th);
        assert_eq!(class.tag, ClassTag::KPlus, "amplitude {a}");
        let checks = ceiling_checks(traj, &class, &th, &cfg);
        pass &= checks.len() == 2 && checks.iter().all(|c| c.passed);
        lines.extend(checks.iter().map(|c| format!("a = {a}: {}", c.detail)));
    }
    verdict("coercivity-ceiling", pass, lines.join("; "));
}

#[test]
fn scaling_identities() {
    let g = RadialGrid::shared(64.0, 262_143).unwrap();
    let mut sampler = FieldSampler::new(g, 42);
    let lambdas = [-1.0, -0.5, 0.5, 1.0, 2.0];
    let (mut lit, mut cor, mut h_err, mut dk) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let f = sampler.smooth();
        let rf = report(&f);
        for &l in &lambdas {
            let rl = report(&scale_f12(&f, l).unwrap());
            let scale = rl.k.abs().max(rf.kc.abs());
            lit = lit.max((rl.k - rf.kc - 1.5 * (-3.0 * l).exp() * rf.l4).abs() / scale);
            cor = cor.max((rl.k - rf.kc - 1.5 * (-2.0 * l).exp() * rf.l4).abs() / scale);
            h_err = h_err.max(rel(rl.h, rf.h));
        }
        let h = 1e-3;
        let ep = report(&scale_phi(&f, h).unwrap()).energy;
        let em = report(&scale_phi(&f, -h).unwrap()).energy;
        dk = dk.max(rel((ep - em) / (2.0 * h), rf.k));
    }
    verdict(
        "scaling-identities",
        lit <= 1e-5 && h_err <= 1e-6 && dk <= 1e-3,
        format!(
            "K(f^λ) - K^c(f) - 1.5e^(-3λ)|f|₄⁴: {lit:.2e} (with e^(-2λ): {cor:.2e}); \
             H drift {h_err:.2e}; dE(φ^λ)/dλ vs K {dk:.2e}"
        ),
    );
}

#[test]
fn classification_equivalence() {
    let th = Thresholds::reference();
    let band = 10.0 * th.quadrature_tolerance() * th.grad_w_sq;
    let g = RadialGrid::shared(16.0, 16_383).unwrap();
    let mut sampler = FieldSampler::new(g, 42);
    let (mut below, mut excluded, mut tries) = (0usize, 0usize, 0usize);
    let mut counter = vec![];
    while below < 500 && tries < 20_000 {
        tries += 1;
        let u = sampler.mixed();
        let c = classify(&u, &th);
        if c.tag == ClassTag::AboveThreshold {
            continue;
        }
        below += 1;
        if c.margins.k_value.abs() <= band || c.margins.grad_margin.abs() <= band {
            excluded += 1;
        } else if !c.bar_agrees {
            counter.push(u.label().unwrap_or("?").to_string());
        }
    }
    verdict(
        "classification-equivalence",
        below >= 500 && counter.is_empty(),
        format!("{below} fields below E^c(W) ({excluded} in the margin band), {} counterexamples", counter.len()),
    );
}

#[test]
fn morawetz_identity() {
    let cfg = preset("morawetz.toml");
    let s = morawetz::identity_study(&cfg).unwrap();
    assert_eq!(s.dt, vec![1e-3, 5e-4]);
    assert_eq!(s.radius, 8.0);
    verdict(
        "morawetz-identity",
        s.residual[0] <= 1e-2 && s.residual[1] < s.residual[0],
        format!("residual {:.3e} at dt = 1e-3, {:.3e} at dt = 5e-4", s.residual[0], s.residual[1]),
    );
}

#[test]
fn averaged_morawetz_rate() {
    let cfg = preset("morawetz.toml");
    let a = morawetz::average_study(&cfg).unwrap();
    let c = morawetz::average_check(&a);
    let pts: Vec<String> = a.points.iter().map(|p| format!("T={} R={:.3} avg={:.3e}", p.t, p.r, p.average)).collect();
    verdict("averaged-morawetz-rate", c.passed, format!("{}; {}", c.detail, pts.join(", ")));
}

#[test]
fn dichotomy() {
    let cfg = preset("dichotomy-sweep.toml");
    let res = sweep::run_sweep(&cfg, 1).unwrap();
    let checks = res.checks();
    let lines: Vec<String> = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    verdict("dichotomy", checks.iter().all(|c| c.passed), lines.join("; "));
}

#[test]
fn dispersive_decay() {
    let cfg = preset("free-decay.toml");
    let u0 = build_initial(cfg.free_decay.grid.build().unwrap(), &cfg.initial).unwrap();
    let r = free_decay::study(&u0, &cfg.free_decay);
    let checks = free_decay::checks(&r);
    let exp_ok = checks.iter().any(|c| c.name == "decay-exponent" && c.passed);
    let sat_ok = checks.iter().any(|c| c.name == "l4-linf-saturates" && c.passed);
    let lines: Vec<String> = checks.iter().map(|c| c.detail.clone()).collect();
    verdict("dispersive-decay", exp_ok && sat_ok, lines.join("; "));
}

fn final_state(u0: &RadialField, dt: f64, t_end: f64) -> RadialField {
    let steps = (t_end / dt).round() as usize;
    let cfg = StepperConfig { dt, t_end, snapshot_stride: steps, ..Default::default() };
    let (traj, _) = evolve(u0, &cfg).unwrap();
    traj.snapshots.last().unwrap().clone()
}

fn l2_distance(a: &RadialField, b: &RadialField) -> f64 {
    let d: Vec<_> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    report(&RadialField::new(a.grid_arc().clone(), d).unwrap()).mass.sqrt()
}

#[test]
fn numerics_hygiene() {
    let g = RadialGrid::shared(20.0, 2047).unwrap();
    let u0 = gaussian(g.clone(), 0.8);
    let t_end = 1.0;
    let dts = [0.02, 0.01, 0.005];
    let reference = final_state(&u0, dts[2] / 16.0, t_end);
    let errs: Vec<f64> = dts.iter().map(|&dt| l2_distance(&final_state(&u0, dt, t_end), &reference)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|p| (1.8..=2.2).contains(p));

    let plan = SpectralPlan::new(g.clone());
    let sampled = FieldSampler::new(g, 3).mixed();
    let back = plan.inverse(&plan.forward(sampled.values()));
    let scale = sampled.max_abs();
    let round_trip = sampled.values().iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;

    let cfg = StepperConfig { dt: 0.01, t_end, snapshot_stride: 10, ..Default::default() };
    let (a, _) = evolve(&u0, &cfg).unwrap();
    let (b, _) = evolve(&u0, &cfg).unwrap();
    let bitwise = series_csv(&a) == series_csv(&b)
        && a.snapshots.iter().zip(&b.snapshots).all(|(x, y)| {
            x.values().iter().zip(y.values()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
        });

    verdict(
        "numerics-hygiene",
        order_ok && round_trip <= 1e-12 && bitwise,
        format!("Strang orders {orders:.3?} (errors {:?}); round trip {round_trip:.2e}; bitwise rerun {bitwise}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()),
    );
}
