//! Localized Morawetz weight, the action `M(t) = 2 Im∫ū∇u·∇a`, its exact
//! time derivative split by region, and the averaged local L⁶ estimate.
//!
//! For radial `u` solving `i∂ₜu + Δu = |u|²u - |u|⁴u`,
//!
//! ```text
//! dM/dt = ∫ 4a''|∂ᵣu|² - (4/3)|u|⁶Δa + |u|⁴Δa - |u|²ΔΔa
//! ```
//!
//! with `Δa = a'' + 2a'/r` and `ΔΔa = a'''' + 4a'''/r`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::functionals::{local_l6, radial_derivative};
use crate::grid::RadialGrid;
use crate::trajectory::{MorawetzProbe, Trajectory};

/// Radial weight with `a = r²` on `[0, R]`, `a' = 3R` beyond `2R`, and a C³
/// transition in between.
///
/// On the transition, with `s = (r - R)/R`,
/// `a' = R(2 + 2s - 2s³ + s⁴)` and `a'' = 2(1 - s)²(1 + 2s)`, so `a'` and `a''`
/// match to third order at both ends and stay nonnegative. The exterior is
/// `a = 3Rr - 2.3R²`; the additive constant keeps `a` continuous and drops out
/// of every identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzWeight {
    radius: f64,
}

/// Nodes in the build-time scan of the transition annulus.
pub const WEIGHT_SCAN_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Inner,
    Transition,
    Outer,
}

impl MorawetzWeight {
    /// Builds the weight and scans `(R, 2R]` for `a' >= 0`, `a'' >= 0`.
    pub fn build(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("Morawetz radius must be positive, got {radius}")));
        }
        let w = Self { radius };
        for i in 1..=WEIGHT_SCAN_POINTS {
            let r = radius * (1.0 + i as f64 / WEIGHT_SCAN_POINTS as f64);
            let (d1, d2) = (w.d1(r), w.d2(r));
            if d1 < 0.0 || d2 < -1e-12 {
                return Err(Error::Construction(format!(
                    "weight fails monotonicity/convexity at r = {r}: a' = {d1}, a'' = {d2}"
                )));
            }
        }
        Ok(w)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn region(&self, r: f64) -> Region {
        if r <= self.radius {
            Region::Inner
        } else if r <= 2.0 * self.radius {
            Region::Transition
        } else {
            Region::Outer
        }
    }

    fn s(&self, r: f64) -> f64 {
        (r - self.radius) / self.radius
    }

    pub fn value(&self, r: f64) -> f64 {
        let rr = self.radius;
        match self.region(r) {
            Region::Inner => r * r,
            Region::Transition => {
                let s = self.s(r);
                rr * rr * (1.0 + 2.0 * s + s * s - s.powi(4) / 2.0 + s.powi(5) / 5.0)
            }
            Region::Outer => 3.0 * rr * r - 2.3 * rr * rr,
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        let rr = self.radius;
        match self.region(r) {
            Region::Inner => 2.0 * r,
            Region::Transition => {
                let s = self.s(r);
                rr * (2.0 + 2.0 * s - 2.0 * s.powi(3) + s.powi(4))
            }
            Region::Outer => 3.0 * rr,
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        match self.region(r) {
            Region::Inner => 2.0,
            Region::Transition => {
                let s = self.s(r);
                2.0 - 6.0 * s * s + 4.0 * s.powi(3)
            }
            Region::Outer => 0.0,
        }
    }

    pub fn d3(&self, r: f64) -> f64 {
        match self.region(r) {
            Region::Transition => {
                let s = self.s(r);
                (-12.0 * s + 12.0 * s * s) / self.radius
            }
            _ => 0.0,
        }
    }

    pub fn d4(&self, r: f64) -> f64 {
        match self.region(r) {
            Region::Transition => (-12.0 + 24.0 * self.s(r)) / (self.radius * self.radius),
            _ => 0.0,
        }
    }

    pub fn laplacian(&self, r: f64) -> f64 {
        self.d2(r) + 2.0 * self.d1(r) / r
    }

    pub fn bilaplacian(&self, r: f64) -> f64 {
        self.d4(r) + 4.0 * self.d3(r) / r
    }

    /// Hessian eigenvalues: radial `a''` and tangential `a'/r` (twice).
    pub fn hessian(&self, r: f64) -> (f64, f64) {
        (self.d2(r), self.d1(r) / r)
    }
}

/// `weight_build(R)`.
pub fn weight_build(radius: f64) -> Result<MorawetzWeight> {
    MorawetzWeight::build(radius)
}

/// `M = 2∫Im(ū ∂ᵣu) a'(r) dx`.
pub fn morawetz_action(u: &RadialField, w: &MorawetzWeight) -> f64 {
    let du = radial_derivative(u);
    action_with(u, &du, w)
}

pub(crate) fn action_with(u: &RadialField, du: &[Complex64], w: &MorawetzWeight) -> f64 {
    let grid = u.grid();
    let dens: Vec<f64> = u
        .values()
        .iter()
        .zip(du)
        .zip(grid.nodes())
        .map(|((z, d), &r)| 2.0 * (z.conj() * d).im * w.d1(r))
        .collect();
    grid.integrate_ball(&dens).expect("field matches grid")
}

/// Region-grouped `dM/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorawetzRate {
    /// `∫_{r<=R} 8|∂ᵣu|² - 8|u|⁶ + 6|u|⁴`
    pub main: f64,
    /// `∫_{r>2R} (6R/r)(|u|⁴ - (4/3)|u|⁶)`; the angular-derivative term of the
    /// general identity vanishes for radial data.
    pub err1: f64,
    /// The full integrand on `R < r <= 2R`.
    pub err2: f64,
}

impl MorawetzRate {
    pub fn total(&self) -> f64 {
        self.main + self.err1 + self.err2
    }
}

pub fn morawetz_rate(u: &RadialField, w: &MorawetzWeight) -> MorawetzRate {
    let du = radial_derivative(u);
    rate_with(u, &du, w)
}

/// Integrand of `dM/dt` with the weight derivatives passed in.
fn integrand(a2: f64, lap: f64, bilap: f64, m: f64, d: f64) -> f64 {
    4.0 * a2 * d - (4.0 / 3.0) * m.powi(3) * lap + m * m * lap - m * bilap
}

pub(crate) fn rate_with(u: &RadialField, du: &[Complex64], w: &MorawetzWeight) -> MorawetzRate {
    let grid = u.grid();
    let rr = w.radius();
    let n = grid.n();
    let mut inner = Vec::with_capacity(n);
    let mut trans = Vec::with_capacity(n);
    let mut outer = Vec::with_capacity(n);
    for ((z, d), &r) in u.values().iter().zip(du).zip(grid.nodes()) {
        let m = z.norm_sqr();
        let g = d.norm_sqr();
        inner.push(8.0 * g - 8.0 * m.powi(3) + 6.0 * m * m);
        // the transition polynomials extended to every node, so the
        // partial-cell integrals at R and 2R stay smooth
        let s = (r - rr) / rr;
        let a1 = rr * (2.0 + 2.0 * s - 2.0 * s.powi(3) + s.powi(4));
        let a2 = 2.0 - 6.0 * s * s + 4.0 * s.powi(3);
        let a3 = (-12.0 * s + 12.0 * s * s) / rr;
        let a4 = (-12.0 + 24.0 * s) / (rr * rr);
        trans.push(integrand(a2, a2 + 2.0 * a1 / r, a4 + 4.0 * a3 / r, m, g));
        outer.push(6.0 * rr / r * (m * m - (4.0 / 3.0) * m.powi(3)));
    }
    let upto = |f: &[f64], x: f64| -> f64 {
        if x >= grid.r_max() {
            grid.integrate_ball(f).expect("field matches grid")
        } else {
            grid.integrate_ball_upto(f, x).expect("radius inside grid")
        }
    };
    let total_outer = grid.integrate_ball(&outer).expect("field matches grid");
    MorawetzRate {
        main: upto(&inner, rr),
        err1: total_outer - upto(&outer, 2.0 * rr),
        err2: upto(&trans, 2.0 * rr) - upto(&trans, rr),
    }
}

pub(crate) fn probe_with(u: &RadialField, du: &[Complex64], w: &MorawetzWeight) -> MorawetzProbe {
    let rate = rate_with(u, du, w);
    MorawetzProbe { m: action_with(u, du, w), main: rate.main, err1: rate.err1, err2: rate.err2 }
}

/// `6R · mass^{1/2} · kinetic^{1/2}`, a Cauchy–Schwarz bound on `|M|` since
/// `|a'| <= 3R`.
pub fn action_bound(w: &MorawetzWeight, mass: f64, kinetic: f64) -> f64 {
    6.0 * w.radius() * mass.sqrt() * kinetic.sqrt()
}

/// A residual of a discrete conservation law, with a note when the sampling
/// is too coarse to trust it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub value: f64,
    pub warning: Option<String>,
}

/// `max_k |(M_{k+1} - M_{k-1})/(t_{k+1} - t_{k-1}) - rate_k| / (1 + |rate_k|)`
/// over interior records.
pub(crate) fn centered_residual(times: &[f64], values: &[f64], rates: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 1..times.len().saturating_sub(1) {
        let fd = (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1]);
        worst = worst.max((fd - rates[k]).abs() / (1.0 + rates[k].abs()));
    }
    worst
}

/// Per-record Morawetz data of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzSeries {
    pub radius: f64,
    pub times: Vec<f64>,
    pub m_values: Vec<f64>,
    pub rate_main: Vec<f64>,
    pub rate_err1: Vec<f64>,
    pub rate_err2: Vec<f64>,
    /// Centered difference of `m_values` (one-sided at the ends).
    pub fd_rate: Vec<f64>,
    /// Snapshot stride the series was taken from; 1 for per-step probes.
    pub stride: usize,
}

impl MorawetzSeries {
    pub const CSV_HEADER: &'static str = "t,M,main,err1,err2,fd_rate";

    /// Uses the per-step probes when they were recorded at `w.radius()`,
    /// otherwise evaluates the snapshots.
    pub fn from_trajectory(traj: &Trajectory, w: &MorawetzWeight) -> Self {
        let probes: Option<Vec<(f64, MorawetzProbe)>> =
            if traj.morawetz_radius == Some(w.radius()) && !traj.series.is_empty() {
                traj.series.iter().map(|s| s.morawetz.map(|p| (s.t, p))).collect()
            } else {
                None
            };
        let (pairs, stride) = match probes {
            Some(p) => (p, 1),
            None => {
                let p = traj
                    .times
                    .iter()
                    .zip(&traj.snapshots)
                    .map(|(&t, u)| {
                        let du = radial_derivative(u);
                        (t, probe_with(u, &du, w))
                    })
                    .collect();
                (p, traj.stride.max(1))
            }
        };
        let times: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let m_values: Vec<f64> = pairs.iter().map(|p| p.1.m).collect();
        let fd_rate = finite_difference(&times, &m_values);
        Self {
            radius: w.radius(),
            rate_main: pairs.iter().map(|p| p.1.main).collect(),
            rate_err1: pairs.iter().map(|p| p.1.err1).collect(),
            rate_err2: pairs.iter().map(|p| p.1.err2).collect(),
            times,
            m_values,
            fd_rate,
            stride,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn rate_total(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.rate_main[k] + self.rate_err1[k] + self.rate_err2[k]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for k in 0..self.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.times[k],
                self.m_values[k],
                self.rate_main[k],
                self.rate_err1[k],
                self.rate_err2[k],
                self.fd_rate[k]
            ));
        }
        out
    }
}

fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

/// Largest relative mismatch between the centered difference of `M(t)` and
/// the computed `dM/dt`.
pub fn identity_residual(traj: &Trajectory, w: &MorawetzWeight) -> IdentityResidual {
    let series = MorawetzSeries::from_trajectory(traj, w);
    let warning = (series.stride > 1).then(|| {
        format!(
            "Morawetz series sampled every {} steps; the difference quotient is not resolving dM/dt",
            series.stride
        )
    });
    IdentityResidual {
        value: centered_residual(&series.times, &series.m_values, &series.rate_total()),
        warning,
    }
}

/// `(1/T)∫₀^T ∫_{|x|<=R}|u|⁶ dx dt` by the trapezoid rule in time.
///
/// Per-step records are used when `R` is the trajectory's local radius or one
/// of its extra radii; otherwise the snapshots are integrated.
pub fn averaged_local_l6(traj: &Trajectory, radius: f64) -> Result<f64> {
    let from_series: Option<(Vec<f64>, Vec<f64>)> = if traj.series.len() >= 2 {
        let col = if traj.local_radius == Some(radius) {
            Some(traj.series.iter().map(|s| s.l6_local).collect())
        } else {
            traj.extra_radii
                .iter()
                .position(|&x| x == radius)
                .map(|i| traj.series.iter().map(|s| s.l6_extra[i]).collect())
        };
        col.map(|c| (traj.series.iter().map(|s| s.t).collect(), c))
    } else {
        None
    };
    let (times, values) = match from_series {
        Some(tv) => tv,
        None => {
            if traj.snapshots.is_empty() {
                return Err(Error::Domain("empty trajectory".into()));
            }
            let vals = traj
                .snapshots
                .iter()
                .map(|u| local_l6(u, radius.min(u.grid().r_max())))
                .collect::<Result<Vec<f64>>>()?;
            (traj.times.clone(), vals)
        }
    };
    Ok(time_average(&times, &values))
}

/// Trapezoid average over `[t₀, t_last]`; a single sample is its own average.
pub fn time_average(times: &[f64], values: &[f64]) -> f64 {
    if times.len() < 2 {
        return values.first().copied().unwrap_or(0.0);
    }
    let span = times[times.len() - 1] - times[0];
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    }
    acc / span
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Contract("slope fit needs two or more paired samples".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive samples".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Fits `average ≈ (C₁R + C₂T/R²)/T` to `(T, R, average)` samples by linear
/// least squares and returns `(C₁, C₂)`.
pub fn fit_average_bound(samples: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    // rows: [R/T, 1/R²] · [C₁, C₂] = average
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, r, avg) in samples {
        let (x1, x2) = (r / t, 1.0 / (r * r));
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * avg;
        b2 += x2 * avg;
    }
    let det = s11 * s22 - s12 * s12;
    if samples.len() < 2 || det.abs() <= 1e-14 * (s11 * s22).abs() {
        return Err(Error::Domain("bound fit is degenerate".into()));
    }
    Ok(((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det))
}

/// Whether the transition annulus lies inside the grid.
pub fn fits_grid(w: &MorawetzWeight, grid: &RadialGrid) -> bool {
    2.0 * w.radius() < grid.r_max()
}
