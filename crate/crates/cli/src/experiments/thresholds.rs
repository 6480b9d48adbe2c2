use cqnls_core::functionals::GRAD_W_SQ_EXACT;
use cqnls_core::io::write_json;
use cqnls_core::variational::{self, ground_state};
use cqnls_core::SpectralPlan;
use serde::Serialize;

use super::{to_json, Check, Context, Experiment, Report};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdsOutput {
    #[serde(flatten)]
    pub thresholds: variational::Thresholds,
    pub r_max: f64,
    pub n: usize,
    pub quadrature_tolerance: f64,
    pub grad_w_sq_exact: f64,
    /// `max |ΔW + W⁵|` over nodes with `r <= 0.95 r_max`.
    pub elliptic_residual: f64,
}

/// `‖∇W‖₂²`, `‖W‖₆⁶`, `E^c(W)`, `C₃` and the elliptic residual of `W`.
pub fn compute(reference: bool, grid: &crate::config::GridConfig) -> cqnls_core::Result<ThresholdsOutput> {
    let g = if reference {
        cqnls_core::RadialGrid::shared(4096.0, (1 << 18) - 1)?
    } else {
        grid.build()?
    };
    let th = if reference {
        variational::Thresholds::reference()
    } else {
        variational::thresholds(g.clone())?
    };
    Ok(ThresholdsOutput {
        thresholds: th,
        r_max: g.r_max(),
        n: g.n(),
        quadrature_tolerance: th.quadrature_tolerance(),
        grad_w_sq_exact: GRAD_W_SQ_EXACT,
        elliptic_residual: elliptic_residual(&g),
    })
}

pub fn elliptic_residual(g: &std::sync::Arc<cqnls_core::RadialGrid>) -> f64 {
    let w = ground_state(g.clone());
    let lw = SpectralPlan::new(g.clone()).laplacian(&w).expect("grid matches");
    let cut = 0.95 * g.r_max();
    lw.values()
        .iter()
        .zip(w.values())
        .zip(g.nodes())
        .filter(|(_, &r)| r <= cut)
        .map(|((l, v), _)| (l + v.powi(5)).norm())
        .fold(0.0, f64::max)
}

pub struct Thresholds;

impl Experiment for Thresholds {
    fn name(&self) -> &'static str {
        "thresholds"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let out = compute(ctx.config.thresholds.reference, &ctx.config.grid)?;
        let json = serde_json::to_string_pretty(&out).expect("serializes");
        println!("{json}");
        write_json(&ctx.path("thresholds.json"), &out)?;
        let th = out.thresholds;
        let checks = vec![
            Check::new(
                "grad-equals-l6",
                th.quadrature_tolerance() <= 1e-2,
                format!("‖∇W‖₂² = {:.6}, ‖W‖₆⁶ = {:.6}", th.grad_w_sq, th.w_l6),
            ),
            Check::new(
                "elliptic-residual",
                out.elliptic_residual <= 1e-5,
                format!("max|ΔW + W⁵| = {:.3e}", out.elliptic_residual),
            ),
        ];
        Ok(Report { summary: to_json(&out), checks, artifacts: vec!["thresholds.json".into()] })
    }
}
