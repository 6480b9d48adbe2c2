//! Cubic Lagrange resampling of radial profiles at stretched radii.

use num_complex::Complex64;

use crate::field::RadialField;

/// Evaluates `u(r)` at arbitrary `r >= 0` by 4-point Lagrange interpolation on
/// the uniform lattice `k dr`, using the even extension `u(-r) = u(r)`, a
/// 4th-order estimate of `u(0)`, and zero at and beyond `r_max`.
pub struct Interpolator<'a> {
    values: &'a [Complex64],
    dr: f64,
    u0: Complex64,
}

impl<'a> Interpolator<'a> {
    pub fn new(u: &'a RadialField) -> Self {
        let v = u.values();
        // even Taylor fit a + b r² + c r⁴ through the first three nodes
        let u0 = (v[0] * 15.0 - v[1] * 6.0 + v[2]) / 10.0;
        Self { values: v, dr: u.grid().dr(), u0 }
    }

    fn lattice(&self, k: isize) -> Complex64 {
        let k = k.unsigned_abs();
        if k == 0 {
            self.u0
        } else if k <= self.values.len() {
            self.values[k - 1]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        let x = r.abs() / self.dr;
        if x >= (self.values.len() + 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = x.floor() as isize;
        let t = x - i as f64;
        // nodes i-1, i, i+1, i+2 at offsets -1, 0, 1, 2
        let w_m1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w_0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w_1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w_2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        self.lattice(i - 1) * w_m1
            + self.lattice(i) * w_0
            + self.lattice(i + 1) * w_1
            + self.lattice(i + 2) * w_2
    }
}

/// `v(r) = amplitude · u(stretch · r)` on the same grid.
pub fn stretch(u: &RadialField, stretch: f64, amplitude: f64) -> RadialField {
    let interp = Interpolator::new(u);
    let values = u.grid().nodes().iter().map(|&r| interp.eval(stretch * r) * amplitude).collect();
    RadialField::from_parts(u.grid_arc().clone(), values)
}
