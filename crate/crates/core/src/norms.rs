//! Sobolev, FIO-Hardy (discrete sector form) and square-function norms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{fft_nd, FftWork, Sign};
use crate::field::{check_p, default_oversampling, power_sum, Domain, Field};
use crate::grid::fast_len;
use crate::partition::{SectorPartition, SectorSplit};
use crate::spectrum::{BoxSampler, Spectrum};

/// Bessel potential symbol `<xi>^s = (1 + |xi|^2)^{s/2}`.
pub fn japanese(xi: &[f64], s: f64) -> f64 {
    (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).powf(s / 2.0)
}

/// `||<D>^s f||_p` of a space-domain field (full-grid path).
pub fn sobolev_norm_field(f: &Field, s: f64, p: f64) -> Result<f64> {
    let spec = f.forward()?;
    let g = spec.apply_multiplier(&|xi: &[f64]| Complex64::new(japanese(xi, s), 0.0))?;
    g.inverse()?.lp_norm(p)
}

/// `||<D>^s f||_p` of a sparse spectrum (cropped path).
pub fn sobolev_norm(f: &Spectrum, s: f64, p: f64, gamma: f64) -> Result<f64> {
    f.apply(|xi| Complex64::new(japanese(xi, s), 0.0)).lp_norm(p, gamma)
}

/// Discrete FIO-Hardy norm with its ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteNorm {
    pub value: f64,
    /// `sum_nu ||chi_nu(D) f||_p^p` (max for `p = inf`).
    pub sector_sum: f64,
    pub prefactor: f64,
    pub sectors: usize,
    pub path: &'static str,
}

/// Prefactor `2^{k(s + ((n-1)/2)(1/2 - 1/p))}`.
pub fn hfio_prefactor(n: usize, k: u32, s: f64, p: f64) -> f64 {
    let e = if p.is_infinite() { (n as f64 - 1.0) / 4.0 } else { (n as f64 - 1.0) / 2.0 * (0.5 - 1.0 / p) };
    2f64.powf(k as f64 * (s + e))
}

/// `||chi_nu(D) f||_p^p` for every sector and every `p` in `ps` (max modulus for `p = inf`).
pub fn sector_powers(f: &Spectrum, split: &SectorSplit, ps: &[f64], gamma: f64) -> Vec<Vec<f64>> {
    (0..split.idx.len())
        .into_par_iter()
        .map(|nu| {
            if split.idx[nu].is_empty() {
                return vec![0.0; ps.len()];
            }
            let piece = split.piece(f, nu);
            BoxSampler::new(piece.grid(), piece.coords(), gamma).powers(piece.values(), ps)
        })
        .collect()
}

fn combine(n: usize, k: u32, s: f64, p: f64, per_sector: impl Iterator<Item = f64>, sectors: usize, path: &'static str) -> DiscreteNorm {
    let pre = hfio_prefactor(n, k, s, p);
    let (sum, value) = if p.is_infinite() {
        let m = per_sector.fold(0.0, f64::max);
        (m, pre * m)
    } else {
        let t: f64 = per_sector.sum();
        (t, pre * t.powf(1.0 / p))
    };
    DiscreteNorm { value, sector_sum: sum, prefactor: pre, sectors, path }
}

/// `2^{k(s + ((n-1)/2)(1/2 - 1/p))} (sum_nu ||chi_nu(D) f||_p^p)^{1/p}` via cropped sector boxes.
pub fn hfio_discrete_norm(f: &Spectrum, s: f64, p: f64, part: &SectorPartition, gamma: f64) -> Result<DiscreteNorm> {
    check_p(p)?;
    if p <= 1.0 {
        return Err(Error::Parameter(format!("discrete norm needs p in (1, inf], got {p}")));
    }
    f.check_annulus(part.k())?;
    let split = part.split(f);
    let pw = sector_powers(f, &split, &[p], gamma);
    let used = split.nonempty().len();
    Ok(combine(f.n(), part.k(), s, p, pw.iter().map(|v| v[0]), used, "cropped"))
}

/// Reference evaluation of [`hfio_discrete_norm`] on the full grid:
/// each `chi_nu(D) f` is formed as a dense field and measured with `lp_norm`.
pub fn hfio_discrete_norm_full(f: &Field, s: f64, p: f64, part: &SectorPartition, gamma: usize) -> Result<DiscreteNorm> {
    check_p(p)?;
    let spec = match f.domain() {
        Domain::Frequency => f.clone(),
        Domain::Space => f.forward()?,
    };
    Spectrum::from_field(&spec)?.check_annulus(part.k())?;
    let terms: Vec<f64> = (0..part.len())
        .into_par_iter()
        .map(|nu| -> Result<f64> {
            let piece = spec.apply_multiplier(&|xi: &[f64]| Complex64::new(part.chi(nu, xi), 0.0))?;
            let norm = piece.inverse()?.lp_norm_oversampled(p, gamma)?;
            Ok(if p.is_infinite() { norm } else { norm.powf(p) })
        })
        .collect::<Result<_>>()?;
    let used = terms.iter().filter(|t| **t > 0.0).count();
    Ok(combine(f.grid().n, part.k(), s, p, terms.into_iter(), used, "full-grid"))
}

/// Evaluates `||(sum_nu |chi_nu(D) h|^2)^{1/2}||_p^p` for coefficient vectors `h`
/// sharing the support of a fixed spectrum.
///
/// Each `|chi_nu(D) h|^2` is a trigonometric polynomial whose frequencies are
/// differences of its box; it is formed exactly on a grid of `2w - 1` points
/// per axis, its coefficients are accumulated, and the sum is sampled once
/// at oversampling `gamma`.
#[derive(Clone, Debug)]
pub struct SquareFunctionPlan {
    n: usize,
    period: f64,
    coef_scale: f64,
    sectors: Vec<SectorPlan>,
    half: Vec<usize>,
    sum_dims: Vec<usize>,
    gamma: f64,
}

#[derive(Clone, Debug)]
struct SectorPlan {
    idx: Vec<usize>,
    wts: Vec<f64>,
    pos: Vec<usize>,
    dims: Vec<usize>,
}

impl SquareFunctionPlan {
    pub fn new(f: &Spectrum, split: &SectorSplit, gamma: f64) -> Self {
        let n = f.n();
        let mut sectors = Vec::new();
        let mut half = vec![0usize; n];
        for nu in split.nonempty() {
            let idx = split.idx[nu].clone();
            let mut lo = vec![i64::MAX; n];
            let mut hi = vec![i64::MIN; n];
            for &i in &idx {
                for (a, c) in f.coord(i).iter().enumerate() {
                    lo[a] = lo[a].min(*c);
                    hi[a] = hi[a].max(*c);
                }
            }
            let width: Vec<usize> = (0..n).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
            let dims: Vec<usize> = width.iter().map(|&w| fast_len(2 * w - 1)).collect();
            for a in 0..n {
                half[a] = half[a].max(width[a] - 1);
            }
            let pos = idx
                .iter()
                .map(|&i| {
                    let c = f.coord(i);
                    let mut q = 0usize;
                    for a in 0..n {
                        q = q * dims[a] + (c[a] - lo[a]) as usize;
                    }
                    q
                })
                .collect();
            sectors.push(SectorPlan { idx, wts: split.wts[nu].clone(), pos, dims });
        }
        let sum_dims = half
            .iter()
            .map(|&h| {
                let w = 2 * h + 1;
                fast_len(((gamma * w as f64).ceil() as usize).max(w))
            })
            .collect();
        Self {
            n,
            period: f.grid().period,
            coef_scale: 1.0 / (f.grid().len() as f64).sqrt(),
            sectors,
            half,
            sum_dims,
            gamma,
        }
    }

    pub fn oversampling(&self) -> f64 {
        self.gamma
    }

    /// `int (sum_nu |chi_nu h|^2)^{p/2}` for each `p` in `ps`, where `h` has
    /// coefficients `vals` on the spectrum the plan was built from.
    pub fn powers(&self, vals: &[Complex64], ps: &[f64]) -> Vec<f64> {
        let n = self.n;
        let sdims = &self.sum_dims;
        let stotal: usize = sdims.iter().product();
        let vol: f64 = sdims.iter().map(|&m| self.period / m as f64).product();
        if ps.iter().all(|&p| p == 2.0) {
            let cell = self.period.powi(n as i32) * self.coef_scale.powi(2);
            let t: f64 = self
                .sectors
                .iter()
                .map(|sp| sp.idx.iter().zip(&sp.wts).map(|(&i, w)| (vals[i] * w).norm_sqr()).sum::<f64>())
                .sum();
            return vec![t * cell; ps.len()];
        }
        let mut acc = vec![Complex64::default(); stotal];
        let mut work = FftWork::default();
        let mut buf = Vec::new();
        for sp in &self.sectors {
            let total: usize = sp.dims.iter().product();
            buf.clear();
            buf.resize(total, Complex64::default());
            for ((&i, w), &q) in sp.idx.iter().zip(&sp.wts).zip(&sp.pos) {
                buf[q] += vals[i] * (w * self.coef_scale);
            }
            fft_nd(&mut buf, &sp.dims, Sign::Inverse, &mut work);
            for v in buf.iter_mut() {
                *v = Complex64::new(v.norm_sqr(), 0.0);
            }
            fft_nd(&mut buf, &sp.dims, Sign::Forward, &mut work);
            let inv = 1.0 / total as f64;
            // Scatter coefficient of frequency d (|d_a| <= w_a - 1 < dims_a / 2 + 1) into acc.
            let mut d = vec![0i64; n];
            for (q, v) in buf.iter().enumerate() {
                let mut r = q;
                let mut ok = true;
                for a in (0..n).rev() {
                    let m = sp.dims[a];
                    let j = r % m;
                    r /= m;
                    let s = if j <= m / 2 { j as i64 } else { j as i64 - m as i64 };
                    if s.unsigned_abs() as usize > self.half[a] {
                        ok = false;
                    }
                    d[a] = s;
                }
                if !ok {
                    continue;
                }
                let mut t = 0usize;
                for a in 0..n {
                    t = t * sdims[a] + d[a].rem_euclid(sdims[a] as i64) as usize;
                }
                acc[t] += v * inv;
            }
        }
        fft_nd(&mut acc, sdims, Sign::Inverse, &mut work);
        ps.iter()
            .map(|&p| {
                if p.is_infinite() {
                    acc.iter().map(|v| v.re.max(0.0).sqrt()).fold(0.0, f64::max)
                } else {
                    let vals: Vec<Complex64> = acc.iter().map(|v| Complex64::new(v.re.max(0.0).sqrt(), 0.0)).collect();
                    power_sum(&vals, p) * vol
                }
            })
            .collect()
    }
}

/// `||(sum_nu |chi_nu(D) f|^2)^{1/2}||_p`.
pub fn square_function_norm(f: &Spectrum, p: f64, part: &SectorPartition, gamma: f64) -> Result<f64> {
    check_p(p)?;
    f.check_annulus(part.k())?;
    let split = part.split(f);
    let plan = SquareFunctionPlan::new(f, &split, gamma);
    let v = plan.powers(f.values(), &[p])[0];
    Ok(if p.is_infinite() { v } else { v.powf(1.0 / p) })
}

/// Default cropped-box oversampling for exponent `p`.
pub fn default_gamma(p: f64) -> f64 {
    default_oversampling(p) as f64
}
