//! The continuous wave-packet system `phi_omega` and its reconstruction formula.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::directions::fibonacci_sphere;
use crate::error::{Error, Result};
use crate::field::check_p;
use crate::quad::{adaptive, bump, plateau, GaussLegendre};
use crate::spectrum::{BoxSampler, Spectrum};

/// Quadrature nodes on `S^{n-1}` with weights summing to 1.
#[derive(Clone, Debug, Serialize)]
pub struct SphereRule {
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `count` equally spaced angles (n = 2) or a Fibonacci set (n = 3), equal weights.
    pub fn uniform(n: usize, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Parameter("sphere rule needs at least one node".into()));
        }
        let nodes = match n {
            2 => (0..count)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / count as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            3 => fibonacci_sphere(count),
            _ => return Err(Error::Unsupported(format!("sphere rules for n = {n}"))),
        };
        Ok(Self { n, nodes, weights: vec![1.0 / count as f64; count] })
    }

    /// Rule with `|Theta_k|` nodes, the default resolution for annulus `k - 2`.
    pub fn for_scale(n: usize, k: u32) -> Result<Self> {
        let count = match n {
            2 => crate::directions::circle_count(k),
            _ => crate::directions::DirectionSet::build(n, k)?.len(),
        };
        Self::uniform(n, count)
    }

    /// Rule with `4 |Theta_k|` nodes, fine enough that the reconstruction
    /// defect of annulus-`k` data stays below 1e-2.
    pub fn matched(n: usize, k: u32) -> Result<Self> {
        let count = Self::for_scale(n, k)?.len();
        Self::uniform(n, 4 * count)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Typical node spacing (angle on the circle, sqrt of area per node on `S^2`).
    pub fn spacing(&self) -> f64 {
        match self.n {
            2 => 2.0 * PI / self.len() as f64,
            _ => (4.0 * PI / self.len() as f64).sqrt(),
        }
    }
}

const SIGMA_NODES: usize = 96;
const ZONAL_PANELS: usize = 4;
const ZONAL_ORDER: usize = 24;

/// The packet family `phi_omega(xi) = int_0^4 Psi(sigma xi) c_sigma phi((xi_hat - omega)/sqrt sigma) dsigma/sigma`.
///
/// `phi` is 1 on `[0, 1/2]` and vanishes beyond 1; `Psi(xi) = b(log2 |xi|) / sqrt(C_b)`
/// with `C_b = ln 2 int b^2`; `q` is 1 on `|xi| <= 2` and vanishes beyond 4.
#[derive(Clone)]
pub struct WavePacketSystem {
    n: usize,
    calderon: f64,
    sigma_rule: GaussLegendre,
    zonal_rule: GaussLegendre,
    c_cache: Arc<Mutex<HashMap<u64, f64>>>,
    radial_cache: Arc<Mutex<HashMap<u64, Arc<RadialNodes>>>>,
}

struct RadialNodes {
    inv_sqrt_sigma: Vec<f64>,
    weight: Vec<f64>,
}

impl WavePacketSystem {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!("wave packet system for n = {n}")));
        }
        let c = adaptive(-1.0, 1.0, 1e-15, 1e-14, 400, |u| bump(u).powi(2))?.value * LN_2;
        Ok(Self {
            n,
            calderon: c,
            sigma_rule: GaussLegendre::new(SIGMA_NODES),
            zonal_rule: GaussLegendre::new(ZONAL_ORDER),
            c_cache: Arc::new(Mutex::new(HashMap::new())),
            radial_cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The radial bump `phi`.
    pub fn phi(r: f64) -> f64 {
        plateau(r, 0.5, 1.0)
    }

    /// The Calderon window `Psi` as a function of `|xi|`.
    pub fn psi(&self, r: f64) -> f64 {
        if r <= 0.5 || r >= 2.0 {
            return 0.0;
        }
        bump(r.log2()) / self.calderon.sqrt()
    }

    /// The low-frequency cutoff `q` as a function of `|xi|`.
    pub fn q(r: f64) -> f64 {
        plateau(r, 2.0, 4.0)
    }

    /// `C_b = int_0^inf b_annulus(s)^2 ds/s`.
    pub fn calderon_constant(&self) -> f64 {
        self.calderon
    }

    /// `int_0^inf Psi(s r)^2 ds/s` by adaptive quadrature (should be 1).
    pub fn calderon_integral(&self, r: f64) -> Result<f64> {
        let lo = (0.5 / r).ln();
        let hi = (2.0 / r).ln();
        Ok(adaptive(lo, hi, 1e-14, 1e-13, 400, |v| self.psi(v.exp() * r).powi(2))?.value)
    }

    /// Normalized zonal sphere integral `int h(|e1 - nu|) dnu` for `h`
    /// supported in `[0, reach]`.
    fn zonal(&self, reach: f64, h: impl Fn(f64) -> f64) -> f64 {
        let tmax = if reach >= 2.0 { PI } else { 2.0 * (reach / 2.0).asin() };
        let (xs, ws) = self.zonal_rule.composite(0.0, tmax, ZONAL_PANELS);
        let mut s = 0.0;
        for (t, w) in xs.iter().zip(&ws) {
            s += w * h(2.0 * (t / 2.0).sin()) * t.sin().powi(self.n as i32 - 2);
        }
        s * zonal_normalization(self.n)
    }

    /// `c_sigma = (int phi((e1 - nu)/sqrt sigma)^2 dnu)^{-1/2}`.
    pub fn c_sigma(&self, sigma: f64) -> f64 {
        let key = sigma.to_bits();
        if let Some(v) = self.c_cache.lock().expect("cache").get(&key) {
            return *v;
        }
        let s = sigma.sqrt();
        let v = self.zonal(s, |d| Self::phi(d / s).powi(2)).powf(-0.5);
        self.c_cache.lock().expect("cache").insert(key, v);
        v
    }

    /// Reference value of `c_sigma` by adaptive quadrature in the polar angle.
    pub fn c_sigma_reference(&self, sigma: f64, tol: f64) -> Result<f64> {
        let s = sigma.sqrt();
        let tmax = if s >= 2.0 { PI } else { 2.0 * (s / 2.0).asin() };
        let n = self.n as i32;
        let v = adaptive(0.0, tmax, tol, tol, 2000, |t| {
            Self::phi(2.0 * (t / 2.0).sin() / s).powi(2) * t.sin().powi(n - 2)
        })?
        .value;
        Ok((v * zonal_normalization(self.n)).powf(-0.5))
    }

    /// `phi_omega(xi)` by adaptive quadrature in `log sigma` to relative tolerance `tol`.
    pub fn eval_continuous_packet(&self, omega: &[f64], xi: &[f64], tol: f64) -> Result<f64> {
        let r = norm(xi);
        let Some(d) = self.support_distance(omega, xi, r) else {
            return Ok(0.0);
        };
        let lo = (0.5 / r).max(d * d);
        let hi = (2.0 / r).min(4.0);
        if lo >= hi {
            return Ok(0.0);
        }
        let res = adaptive(lo.ln(), hi.ln(), tol * 1e-3, tol, 4000, |v| {
            let sigma = v.exp();
            self.psi(sigma * r) * self.c_sigma(sigma) * Self::phi(d / sigma.sqrt())
        })
        .map_err(|e| Error::Numerical(format!("packet integral at omega = {omega:?}, xi = {xi:?}: {e}")))?;
        Ok(res.value)
    }

    /// `|xi_hat - omega|` when `xi` is inside the structural support, else `None`.
    fn support_distance(&self, omega: &[f64], xi: &[f64], r: f64) -> Option<f64> {
        if r < 0.125 {
            return None;
        }
        let d = xi.iter().zip(omega).map(|(x, w)| (x / r - w).powi(2)).sum::<f64>().sqrt();
        if d > 2.0 / r.sqrt() {
            return None;
        }
        Some(d)
    }

    fn radial_nodes(&self, r: f64) -> Arc<RadialNodes> {
        let key = r.to_bits();
        if let Some(v) = self.radial_cache.lock().expect("cache").get(&key) {
            return v.clone();
        }
        // Substitute u = sigma r = 2^v, v in [-1, min(1, log2(4r))].
        let vmax = (4.0 * r).log2().min(1.0);
        let mut inv = Vec::with_capacity(SIGMA_NODES);
        let mut wt = Vec::with_capacity(SIGMA_NODES);
        if vmax > -1.0 {
            let (vs, ws) = self.sigma_rule.mapped(-1.0, vmax);
            for (v, w) in vs.iter().zip(&ws) {
                let u = v.exp2();
                let sigma = u / r;
                inv.push(1.0 / sigma.sqrt());
                wt.push(w * LN_2 * self.psi(u) * self.c_sigma(sigma));
            }
        }
        let nodes = Arc::new(RadialNodes { inv_sqrt_sigma: inv, weight: wt });
        self.radial_cache.lock().expect("cache").insert(key, nodes.clone());
        nodes
    }

    /// `phi_omega(xi)` with a fixed Gauss rule in `log sigma`; agrees with
    /// [`Self::eval_continuous_packet`] to about 1e-8 and is used for bulk evaluation.
    pub fn eval_packet_fast(&self, omega: &[f64], xi: &[f64]) -> f64 {
        let r = norm(xi);
        let Some(d) = self.support_distance(omega, xi, r) else {
            return 0.0;
        };
        let nodes = self.radial_nodes(r);
        nodes
            .inv_sqrt_sigma
            .iter()
            .zip(&nodes.weight)
            .map(|(s, w)| w * Self::phi(d * s))
            .sum()
    }

    /// Reference `int_{S^{n-1}} phi_nu(xi) dnu` (depends on `|xi|` only).
    pub fn packet_mean(&self, r: f64) -> Result<f64> {
        if r < 0.125 {
            return Ok(0.0);
        }
        let lo = 0.5 / r;
        let hi = (2.0 / r).min(4.0);
        if lo >= hi {
            return Ok(0.0);
        }
        Ok(adaptive(lo.ln(), hi.ln(), 1e-15, 1e-12, 4000, |v| {
            let sigma = v.exp();
            let s = sigma.sqrt();
            self.psi(sigma * r) * self.c_sigma(sigma) * self.zonal(s, |d| Self::phi(d / s))
        })?
        .value)
    }

    /// `||f - sum_j w_j m(D) phi_{nu_j}(D) f||_2 / ||f||_2` with `m` the
    /// reciprocal of the reference packet mean.
    pub fn reconstruction_defect(&self, f: &Spectrum, rule: &SphereRule) -> Result<Reconstruction> {
        if rule.n != self.n || f.n() != self.n {
            return Err(Error::Parameter("dimension mismatch".into()));
        }
        let total: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return Ok(Reconstruction { defect: 0.0, zero_input: true, coarse_rule: false, nodes: rule.len() });
        }
        let mut xi = vec![0.0; self.n];
        let mut rmax: f64 = 0.0;
        for i in 0..f.len() {
            let r = f.radius(i);
            if r < 0.5 && f.values()[i] != Complex64::default() {
                return Err(Error::Precondition(format!(
                    "reconstruction needs support in |xi| >= 1/2, found |xi| = {r}"
                )));
            }
            rmax = rmax.max(r);
        }
        let mut means: HashMap<u64, f64> = HashMap::new();
        let mut err = 0.0;
        for i in 0..f.len() {
            f.xi(i, &mut xi);
            let r = norm(&xi);
            let mean = match means.get(&r.to_bits()) {
                Some(m) => *m,
                None => {
                    let m = self.packet_mean(r)?;
                    means.insert(r.to_bits(), m);
                    m
                }
            };
            let sum: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(w, wt)| wt * self.eval_packet_fast(w, &xi))
                .sum();
            err += (1.0 - sum / mean).powi(2) * f.values()[i].norm_sqr();
        }
        Ok(Reconstruction {
            defect: (err / total).sqrt(),
            zero_input: false,
            coarse_rule: rule.spacing() > 1.0 / rmax.sqrt(),
            nodes: rule.len(),
        })
    }

    /// Continuous norm `(int ||phi_omega(D) <D>^s f||_p^p domega)^{1/p} + ||q(D) <D>^s f||_p`.
    pub fn hfio_continuous_norm(&self, f: &Spectrum, s: f64, p: f64, rule: &SphereRule, gamma: f64) -> Result<ContinuousNorm> {
        check_p(p)?;
        if p <= 1.0 || p.is_infinite() {
            return Err(Error::Parameter(format!("continuous norm needs p in (1, inf), got {p}")));
        }
        if rule.n != self.n || f.n() != self.n {
            return Err(Error::Parameter("dimension mismatch".into()));
        }
        let g = f.map(|_, xi, v| v * (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).powf(s / 2.0));
        let low_idx: Vec<usize> = (0..g.len()).filter(|&i| g.radius(i) < 4.0).collect();
        let low = if low_idx.is_empty() {
            0.0
        } else {
            let q: Vec<f64> = low_idx.iter().map(|&i| Self::q(g.radius(i))).collect();
            g.subset(&low_idx, Some(&q)).lp_norm(p, gamma)?
        };
        let unit: Vec<Vec<f64>> = (0..g.len())
            .map(|i| {
                let mut xi = vec![0.0; self.n];
                g.xi(i, &mut xi);
                let r = norm(&xi);
                xi.iter().map(|x| if r > 0.0 { x / r } else { 0.0 }).collect()
            })
            .collect();
        let radii: Vec<f64> = (0..g.len()).map(|i| g.radius(i)).collect();
        let terms: Vec<f64> = rule
            .nodes
            .par_iter()
            .map(|omega| {
                let mut idx = Vec::new();
                let mut vals = Vec::new();
                let mut xi = vec![0.0; self.n];
                for i in 0..g.len() {
                    let r = radii[i];
                    if r < 0.125 {
                        continue;
                    }
                    let dot: f64 = unit[i].iter().zip(omega).map(|(a, b)| a * b).sum();
                    if dot < 1.0 - 2.0 / r {
                        continue;
                    }
                    g.xi(i, &mut xi);
                    let v = self.eval_packet_fast(omega, &xi);
                    if v != 0.0 {
                        idx.push(i);
                        vals.push(v);
                    }
                }
                if idx.is_empty() {
                    return 0.0;
                }
                let piece = g.subset(&idx, Some(&vals));
                BoxSampler::new(piece.grid(), piece.coords(), gamma).powers(piece.values(), &[p])[0]
            })
            .collect();
        let integral: f64 = terms.iter().zip(&rule.weights).map(|(t, w)| t * w).sum();
        let packet = integral.powf(1.0 / p);
        let mass: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        let mean_r = if mass > 0.0 {
            (0..f.len()).map(|i| f.radius(i) * f.values()[i].norm_sqr()).sum::<f64>() / mass
        } else {
            1.0
        };
        let k = mean_r.max(1.0).log2().round();
        Ok(ContinuousNorm {
            value: packet + low,
            packet_term: packet,
            low_term: low,
            nodes: rule.len(),
            spacing: rule.spacing(),
            coarse_rule: rule.spacing() > 2f64.powf(-k / 2.0 - 1.0),
        })
    }
}

fn zonal_normalization(n: usize) -> f64 {
    match n {
        2 => 1.0 / PI,
        3 => 0.5,
        _ => {
            let gl = GaussLegendre::new(64);
            1.0 / gl.integrate(0.0, PI, |t| t.sin().powi(n as i32 - 2))
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Result of [`WavePacketSystem::reconstruction_defect`].
#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub defect: f64,
    pub zero_input: bool,
    pub coarse_rule: bool,
    pub nodes: usize,
}

/// Result of [`WavePacketSystem::hfio_continuous_norm`].
#[derive(Clone, Debug, Serialize)]
pub struct ContinuousNorm {
    pub value: f64,
    pub packet_term: f64,
    pub low_term: f64,
    pub nodes: usize,
    pub spacing: f64,
    pub coarse_rule: bool,
}
