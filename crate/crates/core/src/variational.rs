//! Ground state, sharp thresholds, the K⁺/K⁻ classification, the two scaling
//! families, and coercivity checks.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::functionals::{
    apply_cutoff, gradient_norm_sq, report_against, CutoffProfile, FunctionalReport,
};
use crate::grid::RadialGrid;
use crate::resample;

/// `W(r) = (1 + r²/3)^{-1/2}`, the positive radial solution of `-ΔW = W⁵`.
pub fn ground_state_value(r: f64) -> f64 {
    (1.0 + r * r / 3.0).powf(-0.5)
}

pub fn ground_state(grid: Arc<RadialGrid>) -> RadialField {
    RadialField::from_real_fn(grid, ground_state_value)
        .expect("ground state is finite")
        .with_label("W")
}

/// Rescaled and localized bubble `a λ^{1/2} W(λ r) χ_R(r)`.
pub fn truncated_bubble(grid: Arc<RadialGrid>, a: f64, lambda: f64, cutoff: f64) -> RadialField {
    let chi = CutoffProfile::smooth(cutoff);
    RadialField::from_real_fn(grid, |r| a * lambda.sqrt() * ground_state_value(lambda * r) * chi.value(r))
        .expect("bubble is finite")
        .with_label(format!("bubble(a={a},lambda={lambda},R={cutoff})"))
}

/// Ground-state constants: `‖∇W‖₂²`, `‖W‖₆⁶`, `E^c(W)` and the sharp Sobolev
/// constant `C₃ = ‖∇W‖₂^{-4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub grad_w_sq: f64,
    pub w_l6: f64,
    pub ec_w: f64,
    pub c3: f64,
}

/// Smallest domain on which the ground-state integrals are trusted.
pub const MIN_THRESHOLD_RADIUS: f64 = 100.0;

impl Thresholds {
    /// Quadrature values on `grid`.
    pub fn on_grid(grid: Arc<RadialGrid>) -> Result<Self> {
        if grid.r_max() < MIN_THRESHOLD_RADIUS {
            return Err(Error::Accuracy(format!(
                "r_max = {} < {MIN_THRESHOLD_RADIUS}: the kinetic integrand of W decays like r^-2 \
                 and the truncated integral would be off by about {:.1}%",
                grid.r_max(),
                100.0 * 12.0 * PI / grid.r_max() / crate::functionals::GRAD_W_SQ_EXACT
            )));
        }
        let w = ground_state(grid);
        let grad_w_sq = gradient_norm_sq(&w);
        let w_l6 = crate::functionals::lp_pow(&w, 6.0);
        Ok(Self::from_values(grad_w_sq, w_l6))
    }

    pub fn from_values(grad_w_sq: f64, w_l6: f64) -> Self {
        Self {
            grad_w_sq,
            w_l6,
            ec_w: grad_w_sq / 2.0 - w_l6 / 6.0,
            c3: grad_w_sq.powi(-2),
        }
    }

    /// Thresholds on a large fixed reference grid (`r_max = 4096`,
    /// `n = 2¹⁸ - 1`), computed once per process.
    pub fn reference() -> Self {
        static REF: OnceLock<Thresholds> = OnceLock::new();
        *REF.get_or_init(|| {
            let grid = RadialGrid::shared(4096.0, (1 << 18) - 1).expect("valid grid");
            Self::on_grid(grid).expect("reference grid is large enough")
        })
    }

    /// Relative disagreement between `‖∇W‖₂²` and `‖W‖₆⁶`, which are equal in
    /// the continuum; used as the quadrature tolerance of these constants.
    pub fn quadrature_tolerance(&self) -> f64 {
        (self.grad_w_sq - self.w_l6).abs() / self.grad_w_sq
    }
}

/// `thresholds(grid)`.
pub fn thresholds(grid: Arc<RadialGrid>) -> Result<Thresholds> {
    Thresholds::on_grid(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    KPlus,
    KMinus,
    AboveThreshold,
}

impl ClassTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassTag::KPlus => "KPlus",
            ClassTag::KMinus => "KMinus",
            ClassTag::AboveThreshold => "AboveThreshold",
        }
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `E^c(W) - E(u)`
    pub energy_margin: f64,
    pub k_value: f64,
    /// `‖∇W‖₂² - ‖∇u‖₂²`
    pub grad_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: ClassTag,
    pub report: FunctionalReport,
    pub margins: Margins,
    /// Whether the gradient test (`K̄±`) gives the same side as the sign of `K`.
    /// Always true above the threshold, where neither set applies.
    pub bar_agrees: bool,
}

impl Classification {
    pub const CSV_HEADER: &'static str = "tag,energy_margin,k_value,grad_margin,bar_agrees,input";

    pub fn csv_row(&self, input: &str) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{}",
            self.tag,
            self.margins.energy_margin,
            self.margins.k_value,
            self.margins.grad_margin,
            self.bar_agrees,
            input.replace(',', ";")
        )
    }
}

pub fn classify(u: &RadialField, th: &Thresholds) -> Classification {
    let report = report_against(u, th.grad_w_sq);
    let margins = Margins {
        energy_margin: th.ec_w - report.energy,
        k_value: report.k,
        grad_margin: th.grad_w_sq - report.kinetic,
    };
    let (tag, bar_agrees) = if margins.energy_margin <= 0.0 {
        (ClassTag::AboveThreshold, true)
    } else {
        let k_plus = margins.k_value >= 0.0;
        let bar_plus = margins.grad_margin >= 0.0;
        (if k_plus { ClassTag::KPlus } else { ClassTag::KMinus }, k_plus == bar_plus)
    };
    Classification { tag, report, margins, bar_agrees }
}

/// Rescales `u` to `amplitude · u(stretch · r)` after checking the grid can
/// represent the result.
fn rescale(u: &RadialField, stretch: f64, amplitude: f64) -> Result<RadialField> {
    if u.is_zero() {
        return Ok(RadialField::zeros(u.grid_arc().clone()));
    }
    let grid = u.grid();
    let nodes = grid.nodes();
    let peak = u.max_abs();
    let core = nodes
        .iter()
        .zip(u.values())
        .filter(|(_, z)| z.norm() >= 0.5 * peak)
        .map(|(&r, _)| r)
        .fold(0.0, f64::max)
        .max(grid.dr());
    if core / stretch < 4.0 * grid.dr() {
        return Err(Error::Resolution(format!(
            "rescaled core radius {:.3e} spans fewer than 4 nodes (dr = {:.3e})",
            core / stretch,
            grid.dr()
        )));
    }
    if stretch < 1.0 {
        // The part of u beyond stretch·r_max is pushed off the grid.
        let cut = stretch * grid.r_max();
        let dens: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
        let total = grid.integrate_ball(&dens)?;
        let inside = grid.integrate_ball_upto(&dens, cut.min(grid.r_max()))?;
        if total > 0.0 && (total - inside) / total > 1e-10 {
            return Err(Error::Resolution(format!(
                "stretch {stretch:.3e} pushes a fraction {:.2e} of the mass past r_max",
                (total - inside) / total
            )));
        }
    }
    Ok(resample::stretch(u, stretch, amplitude))
}

/// `φ^λ(x) = e^{3λ} φ(e^{2λ} x)`; `K(φ) = d/dλ E(φ^λ)` at `λ = 0`.
pub fn scale_phi(u: &RadialField, lambda: f64) -> Result<RadialField> {
    if lambda == 0.0 {
        return Ok(u.clone());
    }
    rescale(u, (2.0 * lambda).exp(), (3.0 * lambda).exp())
}

/// `f^λ_{1,-2}(x) = e^{λ} f(e^{2λ} x)`, which leaves `‖∇f‖₂²`, `‖f‖₆⁶` and
/// hence `H` unchanged and multiplies `‖f‖₄⁴` by `e^{-2λ}`.
pub fn scale_f12(u: &RadialField, lambda: f64) -> Result<RadialField> {
    if lambda == 0.0 {
        return Ok(u.clone());
    }
    rescale(u, (2.0 * lambda).exp(), lambda.exp())
}

/// `‖∇u‖₂² - ‖u‖₆⁶`.
pub fn coercivity_gap(u: &RadialField) -> f64 {
    let rep = report_against(u, 1.0);
    rep.kinetic - rep.l6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallCoercivity {
    pub passes: bool,
    /// `‖∇(χ_R u)‖₂² - ‖χ_R u‖₆⁶`
    pub gap: f64,
    pub localized_kinetic: f64,
}

/// Checks `‖∇(χ_R u)‖₂² <= (1 - δ) ‖∇W‖₂²`.
pub fn coercive_on_ball(u: &RadialField, radius: f64, th: &Thresholds, delta: f64) -> BallCoercivity {
    let local = apply_cutoff(u, &CutoffProfile::smooth(radius));
    let rep = report_against(&local, th.grad_w_sq);
    BallCoercivity {
        passes: rep.kinetic <= (1.0 - delta) * th.grad_w_sq,
        gap: rep.kinetic - rep.l6,
        localized_kinetic: rep.kinetic,
    }
}

/// `|∫χ_R Δχ_R |u|²|`, the correction between `∫χ_R²|∇u|²` and `‖∇(χ_R u)‖₂²`.
pub fn cutoff_correction(u: &RadialField, radius: f64) -> f64 {
    let c = CutoffProfile::smooth(radius);
    let dens: Vec<f64> = u
        .values()
        .iter()
        .zip(u.grid().nodes())
        .map(|(z, &r)| c.value(r) * c.laplacian(r) * z.norm_sqr())
        .collect();
    u.grid().integrate_ball(&dens).expect("field matches grid").abs()
}

/// Scans `R = start, start·growth, ...` up to `r_max` and returns the first
/// radius where the cutoff correction drops below `δ ‖∇W‖₂² / 2` and the ball
/// check passes.
pub fn coercivity_radius(
    u: &RadialField,
    th: &Thresholds,
    delta: f64,
    start: f64,
    growth: f64,
) -> Option<f64> {
    let mut radius = start;
    while radius <= u.grid().r_max() {
        if cutoff_correction(u, radius) < 0.5 * delta * th.grad_w_sq
            && coercive_on_ball(u, radius, th, delta).passes
        {
            return Some(radius);
        }
        radius *= growth;
    }
    None
}

/// Ceiling on `y(t) = ‖∇u(t)‖₂² / ‖∇W‖₂²` from the continuity argument: the
/// root `ȳ ∈ (0, 1)` of `(3/2) y - (1/2) y³ = 1 - δ₀`.
///
/// Errors when `δ₀ ∉ (0, 1)`, `y₀ ∉ [0, 1)`, or `y₀ >= ȳ` (the argument needs
/// the initial ratio below the barrier).
pub fn cubic_barrier(y0: f64, delta0: f64) -> Result<f64> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::Domain(format!("delta0 must lie in (0, 1), got {delta0}")));
    }
    if !(0.0..1.0).contains(&y0) {
        return Err(Error::Domain(format!("y0 must lie in [0, 1), got {y0}")));
    }
    // y³ - 3y + 2c = 0 with c = 1 - δ₀; the root in (0, 1) is the k = 1 branch
    // of the trigonometric solution.
    let c = 1.0 - delta0;
    let ybar = 2.0 * ((-c).acos() / 3.0 - 2.0 * PI / 3.0).cos();
    if y0 >= ybar {
        return Err(Error::Hypothesis(format!(
            "initial ratio y0 = {y0} is not below the barrier {ybar}"
        )));
    }
    Ok(ybar)
}

/// Largest `δ₀` with `E(u₀) <= (1 - δ₀) E^c(W)`.
pub fn measured_delta0(energy: f64, th: &Thresholds) -> f64 {
    1.0 - energy / th.ec_w
}

/// Smallest amplitude on a `step` lattice above `start` for which the
/// truncated bubble is in `K⁻` (below the threshold with `K < 0`).
pub fn tune_kminus_amplitude(
    grid: Arc<RadialGrid>,
    lambda: f64,
    cutoff: f64,
    th: &Thresholds,
    start: f64,
    step: f64,
) -> Result<f64> {
    let mut a = start;
    while a < start + 2.0 {
        let u = truncated_bubble(grid.clone(), a, lambda, cutoff);
        if classify(&u, th).tag == ClassTag::KMinus {
            return Ok(a);
        }
        a += step;
    }
    Err(Error::Domain(format!(
        "no K⁻ amplitude in [{start}, {}) for lambda = {lambda}, R = {cutoff}",
        start + 2.0
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{report, GRAD_W_SQ_EXACT};

    #[test]
    fn ground_state_values() {
        assert_eq!(ground_state_value(0.0), 1.0);
        assert!((ground_state_value(3f64.sqrt()) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_constant_matches_closed_form() {
        assert!((GRAD_W_SQ_EXACT - 3.0 * 3f64.sqrt() * PI * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds_need_large_domain() {
        let g = RadialGrid::shared(50.0, 1023).unwrap();
        assert!(matches!(thresholds(g), Err(Error::Accuracy(_))));
    }

    #[test]
    fn reference_thresholds() {
        let th = Thresholds::reference();
        assert!((th.grad_w_sq - GRAD_W_SQ_EXACT).abs() / GRAD_W_SQ_EXACT < 2e-3);
        assert!(th.quadrature_tolerance() < 2e-3);
        assert!((th.ec_w - th.grad_w_sq / 3.0).abs() / th.ec_w < 1e-2);
        assert!((th.c3 * th.grad_w_sq * th.grad_w_sq - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_barrier_values() {
        let y = cubic_barrier(0.0, 0.5).unwrap();
        assert!((y - 0.347_296).abs() < 1e-4);
        // bisection oracle
        let f = |y: f64| 1.5 * y - 0.5 * y.powi(3) - 0.5;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((y - lo).abs() < 1e-12);
        let near_one = cubic_barrier(0.0, 1e-9).unwrap();
        assert!((near_one - 1.0).abs() < 1e-3);
        assert!(matches!(cubic_barrier(0.5, 0.5), Err(Error::Hypothesis(_))));
        assert!(matches!(cubic_barrier(0.1, 1.5), Err(Error::Domain(_))));
        assert!(matches!(cubic_barrier(0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn classify_gaussians() {
        let th = Thresholds::reference();
        let g = RadialGrid::shared(16.0, 4095).unwrap();
        let small = RadialField::from_real_fn(g.clone(), |r| 0.1 * (-r * r).exp()).unwrap();
        let c = classify(&small, &th);
        assert_eq!(c.tag, ClassTag::KPlus);
        assert!((c.report.energy - 0.029_55).abs() < 1e-4);
        assert!(c.bar_agrees);
        let big = RadialField::from_real_fn(g, |r| 1.5 * (-r * r).exp()).unwrap();
        assert_eq!(classify(&big, &th).tag, ClassTag::AboveThreshold);
    }

    #[test]
    fn scale_identities_gaussian() {
        let g = RadialGrid::shared(40.0, 16383).unwrap();
        let u = RadialField::from_real_fn(g, |r| (-r * r / 4.0).exp()).unwrap();
        let base = report(&u);
        assert_eq!(scale_phi(&u, 0.0).unwrap(), u);
        assert_eq!(scale_f12(&u, 0.0).unwrap(), u);
        let v = scale_f12(&u, 0.7).unwrap();
        let rv = report(&v);
        assert!((rv.h - base.h).abs() / base.h < 1e-6, "{} {}", rv.h, base.h);
        let expect_k = base.kc + 1.5 * (-2.0f64 * 0.7).exp() * base.l4;
        assert!((rv.k - expect_k).abs() / expect_k.abs() < 1e-5);
        let m = report(&scale_phi(&u, 0.3).unwrap()).mass;
        assert!((m - base.mass).abs() / base.mass < 1e-6);
        let h = 1e-4;
        let ep = report(&scale_phi(&u, h).unwrap()).energy;
        let em = report(&scale_phi(&u, -h).unwrap()).energy;
        assert!(((ep - em) / (2.0 * h) - base.k).abs() / base.k < 1e-3);
    }

    #[test]
    fn rescale_resolution_errors() {
        let g = RadialGrid::shared(10.0, 255).unwrap();
        let u = RadialField::from_real_fn(g, |r| (-r * r).exp()).unwrap();
        assert!(matches!(scale_phi(&u, 3.0), Err(Error::Resolution(_))));
        assert!(matches!(scale_phi(&u, -2.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn coercivity_on_zero() {
        let th = Thresholds::reference();
        let g = RadialGrid::shared(10.0, 255).unwrap();
        let z = RadialField::zeros(g);
        assert_eq!(coercivity_gap(&z), 0.0);
        let b = coercive_on_ball(&z, 5.0, &th, 0.1);
        assert!(b.passes);
        assert_eq!(b.gap, 0.0);
    }

    #[test]
    fn measured_delta() {
        let th = Thresholds::from_values(3.0, 3.0);
        assert!((measured_delta0(0.5, &th) - 0.5).abs() < 1e-15);
    }
}
