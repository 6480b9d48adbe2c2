//! Uniform radial grid on the ball of radius `r_max`.
//!
//! Nodes are `r_j = j * dr` for `j = 1..=n` with `dr = r_max / (n + 1)`, so
//! both `r = 0` and `r = r_max` are excluded. Fields are Dirichlet for
//! `w = r * u` at both ends.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    dr: f64,
    #[serde(skip)]
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Contract(format!("r_max must be positive, got {r_max}")));
        }
        if n < 8 {
            return Err(Error::Contract(format!("need at least 8 interior nodes, got {n}")));
        }
        let dr = r_max / (n as f64 + 1.0);
        let nodes = (1..=n).map(|j| j as f64 * dr).collect();
        Ok(Self { r_max, n, dr, nodes })
    }

    /// Convenience constructor returning a shared handle.
    pub fn shared(r_max: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(r_max, n).map(Arc::new)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the last node with `r_j <= r`, or `None` when `r < r_1`.
    pub fn last_index_at_or_below(&self, r: f64) -> Option<usize> {
        let k = (r / self.dr).floor() as isize;
        if k < 1 {
            None
        } else {
            Some((k as usize).min(self.n) - 1)
        }
    }

    /// Trapezoid weight of the interior nodes for `∫ f 4πr² dr`, excluding the
    /// `r_max` endpoint handled by [`RadialGrid::integrate_ball`].
    fn shell(&self, j: usize) -> f64 {
        let r = self.nodes[j];
        4.0 * PI * r * r * self.dr
    }

    /// `∫_{|x| <= r_max} f dx` for a radial integrand sampled on the nodes.
    ///
    /// Composite trapezoid in `r` on the measure `4πr² dr`. The `r = 0` end
    /// carries zero weight through `r²`; the `r = r_max` end value is the
    /// linear extrapolation `2 f_n - f_{n-1}` with half-cell weight, which
    /// keeps the rule linear and monotone on nonnegative samples.
    pub fn integrate_ball(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        let n = self.n;
        let mut acc = 0.0;
        for (j, &f) in samples.iter().enumerate() {
            acc += self.shell(j) * f;
        }
        let f_end = 2.0 * samples[n - 1] - samples[n - 2];
        acc += 4.0 * PI * self.r_max * self.r_max * 0.5 * self.dr * f_end;
        Ok(acc)
    }

    /// `∫_{|x| <= radius} f dx` for a nonnegative integrand.
    ///
    /// Trapezoid on the nodes below `radius` plus the partial cell up to
    /// `radius`, with the integrand linearly interpolated. The extrapolated
    /// end value beyond `r_n` is clipped at zero, so the result is
    /// nondecreasing in `radius`.
    pub fn integrate_ball_upto(&self, samples: &[f64], radius: f64) -> Result<f64> {
        self.check_len(samples.len())?;
        if radius > self.r_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "radius {radius} exceeds grid r_max {}",
                self.r_max
            )));
        }
        if radius <= 0.0 {
            return Ok(0.0);
        }
        let g = |j: usize| -> f64 {
            let r = self.nodes[j];
            4.0 * PI * r * r * samples[j]
        };
        let dr = self.dr;
        let Some(k) = self.last_index_at_or_below(radius) else {
            // Partial first cell [0, radius] with g(0) = 0.
            let s = radius / dr;
            let g_at = s * g(0);
            return Ok(0.5 * radius * g_at);
        };
        // Full cells [0, r_1], ..., [r_{k-1}, r_k]: trapezoid weights dr except the
        // last node, which gets dr/2 from the left cell.
        let mut acc = 0.0;
        for j in 0..k {
            acc += g(j) * dr;
        }
        acc += 0.5 * dr * g(k);
        let rk = self.nodes[k];
        let tail = radius - rk;
        if tail > 0.0 {
            let g_right = if k + 1 < self.n {
                g(k + 1)
            } else {
                let f_end = (2.0 * samples[self.n - 1] - samples[self.n - 2]).max(0.0);
                4.0 * PI * self.r_max * self.r_max * f_end
            };
            let frac = tail / dr;
            let g_at = g(k) + frac * (g_right - g(k));
            acc += 0.5 * tail * (g(k) + g_at);
        }
        Ok(acc)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Contract(format!(
                "sample length {len} does not match grid size {}",
                self.n
            )));
        }
        Ok(())
    }
}
