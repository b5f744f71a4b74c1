//! The propagator `e^{it phi(D)}`, space-time norms, windowed sector norms
//! and the translation approximation of single packets.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{check_p, Domain, Field};
use crate::norms::hfio_prefactor;
use crate::partition::SectorPartition;
use crate::phase::PhaseSymbol;
use crate::quad::GaussLegendre;
use crate::spectrum::Spectrum;
use crate::window::{Window, WINDOW_RANGE};

/// `e^{it phi(D)} f` for a dense field in either domain (domain is preserved).
pub fn propagate_field(f: &Field, t: f64, phase: &PhaseSymbol) -> Result<Field> {
    let sym = |xi: &[f64]| Complex64::from_polar(1.0, t * phase.eval(xi));
    match f.domain() {
        Domain::Frequency => f.apply_multiplier(&sym),
        Domain::Space => f.forward()?.apply_multiplier(&sym)?.inverse(),
    }
}

/// `e^{it phi(D)} f` for a sparse spectrum.
pub fn propagate(f: &Spectrum, t: f64, phase: &PhaseSymbol) -> Spectrum {
    f.apply(|xi| Complex64::from_polar(1.0, t * phase.eval(xi)))
}

/// Trapezoid rule with `intervals` equal steps on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TimeRule {
    pub intervals: usize,
}

impl TimeRule {
    /// `max(64, 8 * 2^k)` intervals, resolving the time scale `2^{-k}`.
    pub fn for_scale(k: u32) -> Self {
        Self { intervals: 64.max(8usize << k) }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.intervals;
        let h = 1.0 / m as f64;
        let t = (0..=m).map(|j| j as f64 * h).collect();
        let w = (0..=m).map(|j| if j == 0 || j == m { h / 2.0 } else { h }).collect();
        (t, w)
    }
}

/// `(int_0^1 ||e^{it phi(D)} f||_p^p dt)^{1/p}` for several `p`.
#[derive(Clone, Debug, Serialize)]
pub struct SpacetimeNorm {
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    pub rule: TimeRule,
    /// Set when the rule spacing exceeds `1 / (2 max|xi|)`, a quarter of the
    /// time scale `2^{-k}` of an annulus-`k` input.
    pub coarse_rule: bool,
}

/// `||e^{it phi(D)} f||_p^p` (max modulus for `p = inf`) at each time in `times`.
/// Rows are times, columns follow `ps`.
pub fn time_powers(f: &Spectrum, ps: &[f64], phase: &PhaseSymbol, times: &[f64], gamma: f64) -> Vec<Vec<f64>> {
    if f.is_empty() {
        return vec![vec![0.0; ps.len()]; times.len()];
    }
    let sampler = f.sampler(gamma);
    let mut xi = vec![0.0; f.n()];
    let ph: Vec<f64> = (0..f.len())
        .map(|i| {
            f.xi(i, &mut xi);
            phase.eval(&xi)
        })
        .collect();
    times
        .par_iter()
        .map(|&t| {
            let vals: Vec<Complex64> = f.values().iter().zip(&ph).map(|(v, a)| v * Complex64::from_polar(1.0, t * a)).collect();
            sampler.powers(&vals, ps)
        })
        .collect()
}

pub fn spacetime_lp_norms(f: &Spectrum, ps: &[f64], phase: &PhaseSymbol, rule: &TimeRule, gamma: f64) -> Result<SpacetimeNorm> {
    for &p in ps {
        check_p(p)?;
        if p.is_infinite() {
            return Err(Error::Parameter("space-time norms need finite p".into()));
        }
    }
    let rmax = (0..f.len()).map(|i| f.radius(i)).fold(0.0, f64::max);
    let (t, w) = rule.nodes();
    let rows = time_powers(f, ps, phase, &t, gamma);
    let values = (0..ps.len())
        .map(|j| {
            let s: f64 = rows.iter().zip(&w).map(|(r, w)| w * r[j]).sum();
            s.powf(1.0 / ps[j])
        })
        .collect();
    Ok(SpacetimeNorm {
        p: ps.to_vec(),
        values,
        rule: *rule,
        coarse_rule: rule.spacing() * rmax > 0.5,
    })
}

pub fn spacetime_lp_norm(f: &Spectrum, p: f64, phase: &PhaseSymbol, rule: &TimeRule, gamma: f64) -> Result<f64> {
    Ok(spacetime_lp_norms(f, &[p], phase, rule, gamma)?.values[0])
}

/// Options for the time integral over `R` weighted by `|g(t)|^p`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowedOptions {
    /// Truncation interval of the time integral.
    pub range: (f64, f64),
    pub gamma: f64,
    /// Length of each Gauss-Legendre panel.
    pub panel: f64,
}

impl Default for WindowedOptions {
    fn default() -> Self {
        Self { range: WINDOW_RANGE, gamma: 2.0, panel: 0.25 }
    }
}

/// `(sum_nu int |g(t)|^p ||chi_nu(D) e^{it phi(D)} f||_p^p dt)^{1/p}` and diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct WindowedNorm {
    pub p: f64,
    /// The root of the sector sum (times the prefactor for the FIO-Hardy form).
    pub value: f64,
    pub sector_sum: f64,
    pub prefactor: f64,
    /// Fraction of `int_R |g|^p` outside the truncation interval.
    pub tail_fraction: f64,
    pub time_nodes: usize,
    /// Largest residual phase `max |phi(xi) - grad phi(nu) . xi - c_nu|` over the sector supports.
    pub max_residual_phase: f64,
}

/// Windowed sector sums for each `p`.
///
/// Each piece `chi_nu(D) f` is moved by the translation `t grad phi(nu)`,
/// which leaves its `L^p` norm unchanged; what remains is
/// `e^{it r_nu(D)}` with `|r_nu| <= Phi_nu`, so the time integrand has
/// bandwidth at most `p (Phi_nu + 1)` and a fixed Gauss-Legendre rule per
/// panel resolves it independently of `k`.
pub fn windowed_sector_sums(
    f: &Spectrum,
    ps: &[f64],
    phase: &PhaseSymbol,
    window: &Window,
    part: &SectorPartition,
    opts: &WindowedOptions,
) -> Result<Vec<WindowedNorm>> {
    for &p in ps {
        check_p(p)?;
        if p.is_infinite() || p <= 1.0 {
            return Err(Error::Parameter(format!("windowed norms need p in (1, inf), got {p}")));
        }
    }
    f.check_annulus(part.k())?;
    let (a, b) = opts.range;
    let split = part.split(f);
    let n = f.n();
    let pmax = ps.iter().cloned().fold(2.0, f64::max);
    let all_two = ps.iter().all(|&p| p == 2.0);
    let g2 = window.power_integral(2.0, a, b);
    let panels = ((b - a) / opts.panel).ceil().max(1.0) as usize;
    let per_sector: Vec<(Vec<f64>, usize, f64)> = split
        .nonempty()
        .into_par_iter()
        .map(|nu| {
            let piece = split.piece(f, nu);
            if all_two {
                let e = piece.l2_norm().powi(2) * g2;
                return (vec![e; ps.len()], 0, 0.0);
            }
            let mut grad = vec![0.0; n];
            phase.gradient(&part.dirs().dirs[nu], &mut grad);
            let mut xi = vec![0.0; n];
            let mut r: Vec<f64> = (0..piece.len())
                .map(|i| {
                    piece.xi(i, &mut xi);
                    phase.eval(&xi) - grad.iter().zip(&xi).map(|(g, x)| g * x).sum::<f64>()
                })
                .collect();
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let c = 0.5 * (lo + hi);
            for v in r.iter_mut() {
                *v -= c;
            }
            let big_phi = 0.5 * (hi - lo);
            let band = pmax * (big_phi + 1.0);
            let h = (b - a) / panels as f64;
            let m = 8usize.max((band * h / 2.0).ceil() as usize + 6);
            let (t, w) = GaussLegendre::new(m).composite(a, b, panels);
            let sampler = piece.sampler(opts.gamma);
            let mut acc = vec![0.0; ps.len()];
            let mut vals = vec![Complex64::default(); piece.len()];
            for (t, w) in t.iter().zip(&w) {
                for ((o, v), r) in vals.iter_mut().zip(piece.values()).zip(&r) {
                    *o = v * Complex64::from_polar(1.0, t * r);
                }
                let pw = sampler.powers(&vals, ps);
                let gt = window.eval(*t).abs();
                for j in 0..ps.len() {
                    acc[j] += w * gt.powf(ps[j]) * pw[j];
                }
            }
            (acc, t.len(), big_phi)
        })
        .collect();
    let nodes = per_sector.iter().map(|s| s.1).max().unwrap_or(0);
    let max_phi = per_sector.iter().map(|s| s.2).fold(0.0, f64::max);
    Ok(ps
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let sum: f64 = per_sector.iter().map(|s| s.0[j]).sum();
            WindowedNorm {
                p,
                value: sum.powf(1.0 / p),
                sector_sum: sum,
                prefactor: 1.0,
                tail_fraction: window.tail_fraction(p, a, b),
                time_nodes: nodes,
                max_residual_phase: max_phi,
            }
        })
        .collect())
}

/// The decoupling right-hand side (no `2^{k d(p)}` factor).
pub fn decoupling_rhs(
    f: &Spectrum,
    p: f64,
    phase: &PhaseSymbol,
    window: &Window,
    part: &SectorPartition,
    opts: &WindowedOptions,
) -> Result<WindowedNorm> {
    Ok(windowed_sector_sums(f, &[p], phase, window, part, opts)?.remove(0))
}

/// `2^{k(s + ((n-1)/2)(1/2 - 1/p))}` times [`decoupling_rhs`].
pub fn windowed_hfio_time_norm(
    f: &Spectrum,
    s: f64,
    p: f64,
    phase: &PhaseSymbol,
    window: &Window,
    part: &SectorPartition,
    opts: &WindowedOptions,
) -> Result<WindowedNorm> {
    let mut w = decoupling_rhs(f, p, phase, window, part, opts)?;
    w.prefactor = hfio_prefactor(f.n(), part.k(), s, p);
    w.value *= w.prefactor;
    Ok(w)
}

/// `sup |(grad phi(xi_hat) - grad phi(nu)) . xi|` over lattice points where
/// `|h_hat|` exceeds `1e-12` of its maximum.
pub fn kappa(phase: &PhaseSymbol, h: &Spectrum, nu: &[f64]) -> Result<f64> {
    if h.mass_outside(0.125, f64::INFINITY) > 1e-12 {
        return Err(Error::Precondition(format!(
            "kappa needs h_hat supported away from 0: relative mass {:e} below |xi| = 1/8",
            h.mass_outside(0.125, f64::INFINITY)
        )));
    }
    let n = h.n();
    let vmax = h.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut g_nu = vec![0.0; n];
    phase.gradient(nu, &mut g_nu);
    let mut xi = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut best: f64 = 0.0;
    for i in 0..h.len() {
        if h.values()[i].norm() <= 1e-12 * vmax {
            continue;
        }
        h.xi(i, &mut xi);
        phase.gradient(&xi, &mut g);
        let d: f64 = (0..n).map(|a| (g[a] - g_nu[a]) * xi[a]).sum();
        best = best.max(d.abs());
    }
    Ok(best)
}

/// `sup_x |e^{it phi(D)} h(x) - h(x + t grad phi(nu))|` with its bound.
#[derive(Clone, Debug, Serialize)]
pub struct TranslationDefect {
    pub defect: f64,
    pub kappa: f64,
    pub fourier_l1: f64,
    /// `||h_hat||_1 kappa |t|`.
    pub bound: f64,
    pub shift: Vec<f64>,
}

pub fn translation_defect(h: &Spectrum, nu: &[f64], t: f64, phase: &PhaseSymbol, gamma: f64) -> Result<TranslationDefect> {
    let kap = kappa(phase, h, nu)?;
    if kap * t.abs() > 1.0 {
        return Err(Error::Parameter(format!(
            "translation estimate needs kappa |t| <= 1, got {kap} * {} = {}",
            t.abs(),
            kap * t.abs()
        )));
    }
    let n = h.n();
    let mut shift = vec![0.0; n];
    phase.gradient(nu, &mut shift);
    for s in shift.iter_mut() {
        *s *= t;
    }
    let diff = h.apply(|xi| {
        let a: f64 = shift.iter().zip(xi).map(|(s, x)| s * x).sum();
        Complex64::from_polar(1.0, t * phase.eval(xi)) - Complex64::from_polar(1.0, a)
    });
    let defect = if t == 0.0 || diff.is_empty() { 0.0 } else { diff.sampler(gamma).max_abs(diff.values()) };
    let l1 = h.fourier_l1_norm();
    Ok(TranslationDefect { defect, kappa: kap, fourier_l1: l1, bound: l1 * kap * t.abs(), shift })
}
