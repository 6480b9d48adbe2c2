//! Sine-spectral calculus for radial Dirichlet data.
//!
//! With `w = r u`, the radial Laplacian is `Δu = w'' / r`, and `w` expands in
//! `sin(kπr / r_max)`, `k = 1..=n`. The discrete sine transform (DST-I) is
//! computed through a complex FFT of length `2(n + 1)` on the odd extension,
//! which handles complex input directly.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::RadialField;
use crate::grid::RadialGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct SpectralPlan {
    grid: Arc<RadialGrid>,
    eigenvalues: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("n", &self.grid.n())
            .field("r_max", &self.grid.r_max())
            .finish()
    }
}

/// Reusable buffers for in-place transforms.
#[derive(Debug, Clone)]
pub struct SpectralWorkspace {
    ext: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectralPlan {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        let len = 2 * (n + 1);
        let fft = FftPlanner::new().plan_fft_forward(len);
        let k0 = PI / grid.r_max();
        let eigenvalues = (1..=n).map(|k| (k as f64 * k0).powi(2)).collect();
        Self { grid, eigenvalues, fft }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// `λ_k = (kπ / r_max)²` for `k = 1..=n`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn workspace(&self) -> SpectralWorkspace {
        let n = self.grid.n();
        SpectralWorkspace {
            ext: vec![ZERO; 2 * (n + 1)],
            scratch: vec![ZERO; self.fft.get_inplace_scratch_len()],
        }
    }

    /// Unnormalized DST-I: `S_k = Σ_j x_j sin(π j k / (n+1))`, in place.
    pub fn dst_in_place(&self, data: &mut [Complex64], ws: &mut SpectralWorkspace) {
        let n = self.grid.n();
        debug_assert_eq!(data.len(), n);
        let big = n + 1;
        let ext = &mut ws.ext;
        ext[0] = ZERO;
        ext[big] = ZERO;
        for (j, &x) in data.iter().enumerate() {
            ext[j + 1] = x;
            ext[2 * big - 1 - j] = -x;
        }
        self.fft.process_with_scratch(ext, &mut ws.scratch);
        // Y_k = -2i S_k
        for (k, out) in data.iter_mut().enumerate() {
            let y = ext[k + 1];
            *out = Complex64::new(-0.5 * y.im, 0.5 * y.re);
        }
    }

    /// Inverse of [`SpectralPlan::dst_in_place`].
    pub fn idst_in_place(&self, data: &mut [Complex64], ws: &mut SpectralWorkspace) {
        self.dst_in_place(data, ws);
        let scale = 2.0 / (self.grid.n() as f64 + 1.0);
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut ws = self.workspace();
        let mut out = values.to_vec();
        self.dst_in_place(&mut out, &mut ws);
        out
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut ws = self.workspace();
        let mut out = coeffs.to_vec();
        self.idst_in_place(&mut out, &mut ws);
        out
    }

    /// `Δu = (1/r) (r u)''` with the second derivative taken spectrally.
    ///
    /// The boundary value `w(r_max)` is extrapolated from the last six nodes
    /// and a linear lifting `w(r_max) r / r_max` (which has zero second
    /// derivative) is removed first, so slowly decaying profiles such as the
    /// ground state do not produce a boundary jump in the odd extension.
    pub fn laplacian(&self, u: &RadialField) -> Result<RadialField> {
        self.grid.check_len(u.values().len())?;
        let n = self.grid.n();
        let nodes = self.grid.nodes();
        let l = self.grid.r_max();
        let mut w: Vec<Complex64> =
            u.values().iter().zip(nodes).map(|(z, &r)| z * r).collect();
        let w_end = w[n - 1] * 6.0 - w[n - 2] * 15.0 + w[n - 3] * 20.0 - w[n - 4] * 15.0
            + w[n - 5] * 6.0
            - w[n - 6];
        for (wj, &r) in w.iter_mut().zip(nodes) {
            *wj -= w_end * (r / l);
        }
        let mut ws = self.workspace();
        self.dst_in_place(&mut w, &mut ws);
        for (c, &lam) in w.iter_mut().zip(&self.eigenvalues) {
            *c *= -lam;
        }
        self.idst_in_place(&mut w, &mut ws);
        for (wj, &r) in w.iter_mut().zip(nodes) {
            *wj /= r;
        }
        Ok(RadialField::from_parts(u.grid_arc().clone(), w))
    }

    /// Exact free Schrödinger flow `e^{itΔ}` in the sine eigenbasis.
    pub fn free_propagate(&self, u: &RadialField, t: f64) -> Result<RadialField> {
        self.grid.check_len(u.values().len())?;
        let mut values = u.values().to_vec();
        let phases = self.phases(t);
        let mut ws = self.workspace();
        self.propagate_in_place(&mut values, &phases, &mut ws);
        Ok(RadialField::from_parts(u.grid_arc().clone(), values))
    }

    /// `e^{-iλ_k t}` for every mode.
    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&lam| Complex64::from_polar(1.0, -lam * t)).collect()
    }

    /// Applies a precomputed diagonal multiplier in sine space to `u` values.
    pub fn propagate_in_place(
        &self,
        values: &mut [Complex64],
        multiplier: &[Complex64],
        ws: &mut SpectralWorkspace,
    ) {
        let nodes = self.grid.nodes();
        for (z, &r) in values.iter_mut().zip(nodes) {
            *z *= r;
        }
        self.dst_in_place(values, ws);
        for (c, m) in values.iter_mut().zip(multiplier) {
            *c *= m;
        }
        self.idst_in_place(values, ws);
        for (z, &r) in values.iter_mut().zip(nodes) {
            *z /= r;
        }
    }

    /// Sine coefficients of `w = r u`.
    pub fn coefficients(&self, u: &[Complex64], ws: &mut SpectralWorkspace) -> Vec<Complex64> {
        let mut c: Vec<Complex64> =
            u.iter().zip(self.grid.nodes()).map(|(z, &r)| z * r).collect();
        self.dst_in_place(&mut c, ws);
        c
    }

    /// Fraction of the spectral kinetic energy `Σ λ_k |ŵ_k|²` carried by the
    /// top third of the modes. Values near one mean the field is no longer
    /// resolved by the grid.
    pub fn tail_fraction(&self, u: &[Complex64], ws: &mut SpectralWorkspace) -> f64 {
        let coeffs = self.coefficients(u, ws);
        let cut = (2 * coeffs.len()) / 3;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (k, (c, &lam)) in coeffs.iter().zip(&self.eigenvalues).enumerate() {
            let e = lam * c.norm_sqr();
            total += e;
            if k >= cut {
                tail += e;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        RadialGrid::shared(r_max, n).unwrap()
    }

    #[test]
    fn dst_matches_direct_sum() {
        let g = grid(3.0, 13);
        let plan = SpectralPlan::new(g.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Complex64> =
            (0..13).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = plan.forward(&x);
        for k in 1..=13 {
            let direct: Complex64 = (1..=13)
                .map(|j| x[j - 1] * (PI * (j * k) as f64 / 14.0).sin())
                .sum();
            assert!((direct - s[k - 1]).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip() {
        for &n in &[63usize, 100, 1023] {
            let g = grid(10.0, n);
            let plan = SpectralPlan::new(g);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let y = plan.inverse(&plan.forward(&x));
            let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let nrm: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(err / nrm < 1e-12, "n={n} rel={}", err / nrm);
        }
    }

    #[test]
    fn eigenfunction() {
        let g = grid(20.0, 511);
        let plan = SpectralPlan::new(g.clone());
        let k = PI / 20.0;
        let u = RadialField::from_real_fn(g, |r| (k * r).sin() / r).unwrap();
        let lu = plan.laplacian(&u).unwrap();
        for (a, b) in lu.values().iter().zip(u.values()) {
            assert!((a + b * (k * k)).norm() < 1e-10);
        }
    }

    #[test]
    fn gaussian_laplacian() {
        let g = grid(12.0, 1023);
        let plan = SpectralPlan::new(g.clone());
        let u = RadialField::from_real_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        let lu = plan.laplacian(&u).unwrap();
        for (&r, z) in g.nodes().iter().zip(lu.values()) {
            let exact = (4.0 * r * r - 6.0) * (-r * r).exp();
            assert!((z.re - exact).abs() < 1e-8 && z.im.abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn free_propagate_identity_and_unitarity() {
        let g = grid(30.0, 1023);
        let plan = SpectralPlan::new(g.clone());
        let u = RadialField::from_fn(g.clone(), |r| Complex64::new((-r * r).exp(), 0.3 * r * (-r * r).exp()))
            .unwrap();
        let same = plan.free_propagate(&u, 0.0).unwrap();
        for (a, b) in same.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let w2 = |v: &RadialField| -> f64 {
            v.values().iter().zip(g.nodes()).map(|(z, r)| (z * r).norm_sqr()).sum()
        };
        let later = plan.free_propagate(&u, 1.7).unwrap();
        assert!((w2(&later) - w2(&u)).abs() / w2(&u) < 1e-12);
    }

    #[test]
    fn tail_fraction_small_for_smooth_field() {
        let g = grid(10.0, 255);
        let plan = SpectralPlan::new(g.clone());
        let u = RadialField::from_real_fn(g, |r| (-r * r).exp()).unwrap();
        let mut ws = plan.workspace();
        assert!(plan.tail_fraction(u.values(), &mut ws) < 1e-10);
    }
}
