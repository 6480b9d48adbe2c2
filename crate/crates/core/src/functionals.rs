//! Scalar functionals of a radial field, cutoffs, and discrete space-time norms.
//!
//! Derivatives are 4th-order finite differences on `w = r u` (odd reflection
//! at the origin, one-sided closure at `r_max`); integrals go through
//! [`RadialGrid::integrate_ball`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::grid::RadialGrid;
use crate::trajectory::Trajectory;

/// `‖∇W‖₂² = ‖W‖₆⁶ = 3√3π²/4` for the ground state `W = (1 + r²/3)^{-1/2}`.
pub const GRAD_W_SQ_EXACT: f64 = 12.820_992_204_969_127;

/// Radial derivative `∂_r u` on the nodes.
pub fn radial_derivative(u: &RadialField) -> Vec<Complex64> {
    let grid = u.grid();
    let nodes = grid.nodes();
    let w: Vec<Complex64> = u.values().iter().zip(nodes).map(|(z, &r)| z * r).collect();
    let dw = derivative_odd_origin(&w, grid.dr());
    dw.iter()
        .zip(u.values())
        .zip(nodes)
        .map(|((dwj, uj), &r)| (dwj - uj) / r)
        .collect()
}

/// 4th-order derivative of samples `f_j = f(j h)`, `j = 1..=n`, of a function
/// odd about the origin.
fn derivative_odd_origin(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let at = |j: isize| -> Complex64 {
        // j is 1-based; f(0) = 0 and f(-j) = -f(j).
        match j {
            0 => Complex64::new(0.0, 0.0),
            j if j < 0 => -f[(-j) as usize - 1],
            j => f[j as usize - 1],
        }
    };
    let c = 1.0 / (12.0 * h);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (idx, o) in out.iter_mut().enumerate() {
        let j = idx as isize + 1;
        *o = if idx + 2 < n {
            (at(j - 2) - at(j - 1) * 8.0 + at(j + 1) * 8.0 - at(j + 2)) * c
        } else if idx + 1 < n {
            (at(j + 1) * 3.0 + at(j) * 10.0 - at(j - 1) * 18.0 + at(j - 2) * 6.0 - at(j - 3)) * c
        } else {
            (at(j) * 25.0 - at(j - 1) * 48.0 + at(j - 2) * 36.0 - at(j - 3) * 16.0
                + at(j - 4) * 3.0)
                * c
        };
    }
    out
}

/// `‖∇u‖₂²` for radial `u`.
pub fn gradient_norm_sq(u: &RadialField) -> f64 {
    let du = radial_derivative(u);
    let dens: Vec<f64> = du.iter().map(|z| z.norm_sqr()).collect();
    integrate(u.grid(), &dens)
}

fn integrate(grid: &RadialGrid, samples: &[f64]) -> f64 {
    grid.integrate_ball(samples).expect("field length matches its grid")
}

/// `∫|u|^p dx`.
pub fn lp_pow(u: &RadialField, p: f64) -> f64 {
    let dens: Vec<f64> = u.values().iter().map(|z| z.norm().powf(p)).collect();
    integrate(u.grid(), &dens)
}

pub fn mass(u: &RadialField) -> f64 {
    let dens: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    integrate(u.grid(), &dens)
}

/// `‖u‖_{H¹} = (‖u‖₂² + ‖∇u‖₂²)^{1/2}`.
pub fn h1_norm(u: &RadialField) -> f64 {
    (mass(u) + gradient_norm_sq(u)).sqrt()
}

/// Every scalar functional of one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mass: f64,
    /// `‖∇u‖₂²`
    pub kinetic: f64,
    /// `‖u‖₄⁴`
    pub l4: f64,
    /// `‖u‖₆⁶`
    pub l6: f64,
    pub energy: f64,
    pub energy_c: f64,
    pub k: f64,
    pub h: f64,
    pub kc: f64,
    pub y_ratio: f64,
}

impl FunctionalReport {
    pub const CSV_HEADER: &'static str = "mass,kinetic,l4,l6,energy,energy_c,k,h,kc,y_ratio";

    /// Assembles the derived functionals from the four primitive integrals.
    pub fn from_parts(mass: f64, kinetic: f64, l4: f64, l6: f64, grad_w_sq: f64) -> Self {
        Self {
            mass,
            kinetic,
            l4,
            l6,
            energy: kinetic / 2.0 + l4 / 4.0 - l6 / 6.0,
            energy_c: kinetic / 2.0 - l6 / 6.0,
            k: 2.0 * (kinetic - l6) + 1.5 * l4,
            h: (kinetic + l6) / 6.0,
            kc: 2.0 * (kinetic - l6),
            y_ratio: kinetic / grad_w_sq,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.mass,
            self.kinetic,
            self.l4,
            self.l6,
            self.energy,
            self.energy_c,
            self.k,
            self.h,
            self.kc,
            self.y_ratio
        )
    }
}

/// Functionals of `u`, with `y_ratio` taken against the exact `‖∇W‖₂²`.
pub fn report(u: &RadialField) -> FunctionalReport {
    report_against(u, GRAD_W_SQ_EXACT)
}

pub fn report_against(u: &RadialField, grad_w_sq: f64) -> FunctionalReport {
    let grid = u.grid();
    let n = grid.n();
    let mut m = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for z in u.values() {
        let a2 = z.norm_sqr();
        m.push(a2);
        q.push(a2 * a2);
        s.push(a2 * a2 * a2);
    }
    FunctionalReport::from_parts(
        integrate(grid, &m),
        gradient_norm_sq(u),
        integrate(grid, &q),
        integrate(grid, &s),
        grad_w_sq,
    )
}

/// `∫_{|x|<=R}|u|⁶ dx`.
pub fn local_l6(u: &RadialField, radius: f64) -> Result<f64> {
    let dens = u.abs_pow(6);
    u.grid().integrate_ball_upto(&dens, radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKind {
    SmoothChi,
    BallIndicator,
}

/// `χ_R(r) = χ(r / R)`.
///
/// The smooth profile is `1` on `s <= 1/2`, `0` on `s > 1`, and
/// `1 - S(2s - 1)` in between with the quintic smoothstep
/// `S(x) = 10x³ - 15x⁴ + 6x⁵`, which is C².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub kind: CutoffKind,
    pub radius: f64,
}

impl CutoffProfile {
    pub fn smooth(radius: f64) -> Self {
        Self { kind: CutoffKind::SmoothChi, radius }
    }

    pub fn ball(radius: f64) -> Self {
        Self { kind: CutoffKind::BallIndicator, radius }
    }

    pub fn value(&self, r: f64) -> f64 {
        let s = r / self.radius;
        match self.kind {
            CutoffKind::BallIndicator => {
                if s <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffKind::SmoothChi => {
                if s <= 0.5 {
                    1.0
                } else if s > 1.0 {
                    0.0
                } else {
                    let x = 2.0 * s - 1.0;
                    1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
                }
            }
        }
    }

    /// `∂_r χ_R`; zero for the indicator away from its jump.
    pub fn d1(&self, r: f64) -> f64 {
        let s = r / self.radius;
        match self.kind {
            CutoffKind::BallIndicator => 0.0,
            CutoffKind::SmoothChi => {
                if s <= 0.5 || s > 1.0 {
                    0.0
                } else {
                    let x = 2.0 * s - 1.0;
                    // d/dx S = 30x²(1-x)², dx/dr = 2/R
                    -30.0 * x * x * (1.0 - x) * (1.0 - x) * 2.0 / self.radius
                }
            }
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        let s = r / self.radius;
        match self.kind {
            CutoffKind::BallIndicator => 0.0,
            CutoffKind::SmoothChi => {
                if s <= 0.5 || s > 1.0 {
                    0.0
                } else {
                    let x = 2.0 * s - 1.0;
                    // d²/dx² S = 60x(1-x)(1-2x)
                    -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) * 4.0 / (self.radius * self.radius)
                }
            }
        }
    }

    /// `Δχ_R = χ'' + 2χ'/r`.
    pub fn laplacian(&self, r: f64) -> f64 {
        self.d2(r) + 2.0 * self.d1(r) / r
    }
}

/// Pointwise product `χ_R u`.
pub fn apply_cutoff(u: &RadialField, c: &CutoffProfile) -> RadialField {
    let values = u
        .values()
        .iter()
        .zip(u.grid().nodes())
        .map(|(z, &r)| z * c.value(r))
        .collect();
    let out = RadialField::from_parts(u.grid_arc().clone(), values);
    match u.label() {
        Some(l) => out.with_label(l),
        None => out,
    }
}

/// The two sides of `∫χ_R²|∇u|² = ∫|∇(χ_R u)|² + ∫χ_R Δχ_R |u|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl CutoffIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (1.0 + self.lhs.abs())
    }
}

pub fn cutoff_identity(u: &RadialField, radius: f64) -> CutoffIdentity {
    let c = CutoffProfile::smooth(radius);
    let grid = u.grid();
    let du = radial_derivative(u);
    let lhs_dens: Vec<f64> = du
        .iter()
        .zip(grid.nodes())
        .map(|(d, &r)| c.value(r).powi(2) * d.norm_sqr())
        .collect();
    let cu = apply_cutoff(u, &c);
    let grad_cu = gradient_norm_sq(&cu);
    let corr: Vec<f64> = u
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(z, &r)| c.value(r) * c.laplacian(r) * z.norm_sqr())
        .collect();
    CutoffIdentity { lhs: integrate(grid, &lhs_dens), rhs: grad_cu + integrate(grid, &corr) }
}

/// `|LHS - RHS| / (1 + |LHS|)` for the cutoff integration-by-parts identity.
pub fn cutoff_identity_residual(u: &RadialField, radius: f64) -> f64 {
    cutoff_identity(u, radius).residual()
}

/// `max_j r_j |u(r_j)|`, the quantity bounded by the radial Sobolev embedding.
pub fn radial_weighted_sup(u: &RadialField) -> f64 {
    u.values().iter().zip(u.grid().nodes()).map(|(z, &r)| r * z.norm()).fold(0.0, f64::max)
}

/// `(∫|u|^r dx)^{1/r}`, with `r = ∞` the max norm.
pub fn lr_norm(u: &RadialField, r: f64) -> f64 {
    if r.is_infinite() {
        u.max_abs()
    } else {
        lp_pow(u, r).max(0.0).powf(1.0 / r)
    }
}

/// Discrete `‖u‖_{L^q_t L^r_x}` over the snapshots of a trajectory.
///
/// Trapezoid in time of `‖u(t)‖_r^q`, then the `1/q` power; `q = ∞` takes
/// the max over snapshots.
pub fn spacetime_norm(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    if !(q >= 1.0 && r >= 1.0) {
        return Err(Error::Domain(format!("exponents must lie in [1, ∞], got q={q}, r={r}")));
    }
    traj.uniform_spacing()?;
    let norms: Vec<f64> = traj.snapshots.iter().map(|u| lr_norm(u, r)).collect();
    Ok(time_norm(&traj.times, &norms, q))
}

/// `(∫ f(t)^q dt)^{1/q}` by the trapezoid rule, or `max f` when `q = ∞`.
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        acc += 0.5 * h * (values[i].powf(q) + values[i - 1].powf(q));
    }
    acc.powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        RadialGrid::shared(r_max, n).unwrap()
    }

    fn gaussian(g: &Arc<RadialGrid>, a: f64) -> RadialField {
        RadialField::from_real_fn(g.clone(), |r| a * (-r * r).exp()).unwrap()
    }

    #[test]
    fn gaussian_report() {
        // Closed-form Gaussian moments: ∫e^{-p r²}dx = (π/p)^{3/2}.
        let m = (PI / 2.0).powf(1.5);
        let kin = 3.0 * m;
        let l4 = (PI / 4.0).powf(1.5);
        let l6 = (PI / 6.0).powf(1.5);
        let g = grid(16.0, 4095);
        let rep = report(&gaussian(&g, 1.0));
        assert!((rep.mass - m).abs() < 1e-6);
        assert!((rep.kinetic - kin).abs() < 1e-6);
        assert!((rep.l4 - l4).abs() < 1e-6);
        assert!((rep.l6 - l6).abs() < 1e-6);
        for (got, want) in [
            (rep.mass, 1.9687),
            (rep.kinetic, 5.9061),
            (rep.l4, 0.6960),
            (rep.l6, 0.3789),
            (rep.energy, 3.0639),
            (rep.k, 12.098),
            (rep.h, 1.0475),
            (rep.kc, 11.054),
        ] {
            assert!((got - want).abs() < 2e-3, "{got} vs {want}");
        }
        assert!((rep.energy - (rep.h + rep.k / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_report() {
        let g = grid(4.0, 63);
        let rep = report(&RadialField::zeros(g));
        assert_eq!(rep.mass, 0.0);
        assert_eq!(rep.kinetic, 0.0);
        assert_eq!(rep.energy, 0.0);
        assert_eq!(rep.k, 0.0);
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = grid(8.0, 1023);
        let u = gaussian(&g, 1.0);
        let du = radial_derivative(&u);
        for (&r, d) in g.nodes().iter().zip(&du) {
            let exact = -2.0 * r * (-r * r).exp();
            // (w' - u)/r loses one order next to the origin
            let tol = if r > 0.1 { 1e-7 } else { 1e-5 };
            assert!((d.re - exact).abs() < tol, "r={r}");
        }
    }

    #[test]
    fn constant_interior_has_no_gradient() {
        let g = grid(10.0, 511);
        let c = CutoffProfile::smooth(8.0);
        let u = RadialField::from_real_fn(g.clone(), |r| 0.7 * c.value(r)).unwrap();
        let du = radial_derivative(&u);
        for (&r, d) in g.nodes().iter().zip(&du) {
            if r < 3.9 {
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn local_l6_values() {
        let g = grid(12.0, 4095);
        let u = gaussian(&g, 1.0);
        let full = local_l6(&u, 12.0).unwrap();
        assert!((full - report(&u).l6).abs() < 1e-12);
        // 4π∫₀¹ r² e^{-6r²} dr = (π/6)^{3/2} erf(√6) - (π/3) e^{-6}·... evaluated
        // by the Simpson oracle below.
        let oracle = simpson(|r| 4.0 * PI * r * r * (-6.0 * r * r).exp(), 0.0, 1.0, 20_000);
        assert!((local_l6(&u, 1.0).unwrap() - oracle).abs() < 1e-5);
        assert!((oracle - 0.37608).abs() < 1e-4);
        assert_eq!(local_l6(&RadialField::zeros(g.clone()), 3.0).unwrap(), 0.0);
        assert!(matches!(local_l6(&u, 13.0), Err(Error::Domain(_))));
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let c = CutoffProfile::smooth(4.0);
        assert_eq!(c.value(1.9), 1.0);
        assert_eq!(c.value(4.1), 0.0);
        assert!((c.value(3.0) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = c.value(5.0 * i as f64 / 1000.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let c = CutoffProfile::smooth(3.0);
        let h = 1e-5;
        // avoid the C² kinks at R/2 and R
        for i in 1..100 {
            let r = 1.003 + 2.5 * i as f64 / 100.0;
            let fd1 = (c.value(r + h) - c.value(r - h)) / (2.0 * h);
            let fd2 = (c.d1(r + h) - c.d1(r - h)) / (2.0 * h);
            assert!((fd1 - c.d1(r)).abs() < 1e-6);
            assert!((fd2 - c.d2(r)).abs() < 1e-5);
        }
    }

    #[test]
    fn wide_cutoff_is_identity() {
        let g = grid(5.0, 127);
        let u = gaussian(&g, 1.0);
        let v = apply_cutoff(&u, &CutoffProfile::smooth(10.0));
        assert_eq!(u.values(), v.values());
    }

    #[test]
    fn cutoff_identity_gaussian() {
        let g = grid(16.0, 4095);
        let u = gaussian(&g, 1.0);
        assert!(cutoff_identity_residual(&u, 4.0) <= 1e-5);
        assert_eq!(cutoff_identity_residual(&RadialField::zeros(g), 4.0), 0.0);
    }

    #[test]
    fn weighted_sup_gaussian() {
        let g = grid(8.0, 8191);
        let u = gaussian(&g, 1.0);
        let s = radial_weighted_sup(&u);
        assert!((s - (2.0 * std::f64::consts::E).powf(-0.5)).abs() < 1e-3);
    }

    #[test]
    fn spacetime_norm_constant() {
        let g = grid(8.0, 255);
        let u = gaussian(&g, 1.0);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let traj = Trajectory::constant(u.clone(), times);
        let got = spacetime_norm(&traj, 4.0, 6.0).unwrap();
        let want = 10f64.powf(0.25) * lr_norm(&u, 6.0);
        assert!((got - want).abs() < 1e-12 * want);
        let got_inf = spacetime_norm(&traj, f64::INFINITY, f64::INFINITY).unwrap();
        assert!((got_inf - 1.0).abs() < 1e-3);
        assert!(spacetime_norm(&Trajectory::default(), 2.0, 2.0).is_err());
    }
}
