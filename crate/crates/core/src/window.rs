//! The time window `g` with `g_hat` supported in `[-1, 1]` and `|g| >= 1` on `[0, 1]`.

use serde::Serialize;

use crate::quad::{bump, GaussLegendre};

/// Default truncation of the time integral over `R`.
pub const WINDOW_RANGE: (f64, f64) = (-3.0, 4.0);
/// Range on which tail fractions are measured (`g` is below 1e-20 of its peak beyond it).
const TAIL_RANGE: f64 = 60.0;

/// `g(t) = A int_{-1}^{1} b(tau) cos(t tau) dtau`, scaled so that `min_{[0,1]} g = g(1) = 1`.
///
/// `g` is the inverse transform of the even bump `b`, so its transform vanishes
/// outside `[-1, 1]`; `cos(t tau) >= cos 1 > 0` for `|t|, |tau| <= 1` keeps it
/// positive and decreasing on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Window {
    scale: f64,
    tau: Vec<f64>,
    wts: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowInfo {
    pub scale: f64,
    pub g0: f64,
    pub g1: f64,
    pub min_on_unit: f64,
    pub support: f64,
}

impl Window {
    pub fn build() -> Self {
        let (tau, wts) = GaussLegendre::new(24).composite(-1.0, 1.0, 8);
        let mut w = Self { scale: 1.0, tau, wts };
        w.scale = 1.0 / w.eval(1.0);
        w
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.scale * self.tau.iter().zip(&self.wts).map(|(x, w)| w * bump(*x) * (t * x).cos()).sum::<f64>()
    }

    /// `g_hat` up to the constant `2 pi A`: the template bump.
    pub fn transform(&self, tau: f64) -> f64 {
        bump(tau)
    }

    /// Bound on the support of `g_hat`.
    pub fn support(&self) -> f64 {
        1.0
    }

    /// Minimum of `|g|` over `probes + 1` equispaced points of `[0, 1]`.
    pub fn min_on_unit(&self, probes: usize) -> f64 {
        (0..=probes).map(|j| self.eval(j as f64 / probes as f64).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn info(&self) -> WindowInfo {
        WindowInfo {
            scale: self.scale,
            g0: self.eval(0.0),
            g1: self.eval(1.0),
            min_on_unit: self.min_on_unit(10_000),
            support: self.support(),
        }
    }

    /// `int_a^b |g|^p dt`.
    pub fn power_integral(&self, p: f64, a: f64, b: f64) -> f64 {
        let panels = ((b - a) * 4.0).ceil().max(1.0) as usize;
        let (t, w) = GaussLegendre::new(16).composite(a, b, panels);
        t.iter().zip(&w).map(|(t, w)| w * self.eval(*t).abs().powf(p)).sum()
    }

    /// Fraction of `int_R |g|^p` lying outside `[a, b]`.
    pub fn tail_fraction(&self, p: f64, a: f64, b: f64) -> f64 {
        let total = self.power_integral(p, -TAIL_RANGE, TAIL_RANGE);
        let inside = self.power_integral(p, a, b);
        ((total - inside) / total).max(0.0)
    }
}

impl Default for Window {
    fn default() -> Self {
        Self::build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_even() {
        let g = Window::build();
        assert!((g.eval(1.0) - 1.0).abs() < 1e-14);
        assert!(g.eval(0.0) >= g.eval(1.0));
        assert!(g.min_on_unit(10_000) >= 1.0 - 1e-12);
        for t in [0.3, 2.5, 7.0] {
            assert_eq!(g.eval(t), g.eval(-t));
        }
    }

    #[test]
    fn tail_decreases_with_p() {
        let g = Window::build();
        let (a, b) = WINDOW_RANGE;
        let t2 = g.tail_fraction(2.0, a, b);
        let t12 = g.tail_fraction(12.0, a, b);
        assert!(t2 > t12 && t12 > 0.0 && t2 < 0.1);
    }
}
