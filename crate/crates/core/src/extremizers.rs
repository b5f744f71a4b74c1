//! Test functions that saturate the local smoothing exponents: the bump `psi`,
//! full dyadic-parabolic packets `f_nu`, unit-scale packets `g_nu`, random
//! annulus data and Rademacher sign sums.
//!
//! All families are synthesized on the frequency lattice from the exact
//! transform of `psi`, so their frequency support is exact and the periodic
//! field is the periodization of the function on `R^n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::GridSpec;
use crate::partition::{SectorPartition, SectorSplit};
use crate::quad::{bessel_j0, bump, GaussLegendre};
use crate::spectrum::Spectrum;

const TABLE_SIZE: usize = 2048;
/// Fraction of `int psi^2` allowed outside the half cell.
const TAIL_MASS: f64 = 1e-4;

/// `psi = A (F^{-1} b)^2` with `b(xi) = bump(2|xi|/c)`, so `psi_hat` is supported in `|xi| <= c`.
#[derive(Clone, Debug)]
pub struct BumpProfile {
    n: usize,
    c: f64,
    scale: f64,
    /// `(b * b)(r)` on `TABLE_SIZE + 1` equispaced radii of `[0, c]`.
    conv: Vec<f64>,
    radial: (Vec<f64>, Vec<f64>),
    min_on_ball: f64,
}

impl BumpProfile {
    pub fn build(n: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Parameter(format!("bump support radius c = {c} must lie in (0, 1]")));
        }
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!("bump profiles for n = {n}")));
        }
        let radial = GaussLegendre::new(64).mapped(0.0, c / 2.0);
        let mut p = Self { n, c, scale: 1.0, conv: Vec::new(), radial, min_on_ball: 0.0 };
        let m = (0..=1000).map(|j| p.inverse_b(j as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
        if m <= 0.0 {
            return Err(Error::Construction(format!("F^-1 b has minimum {m} on the unit ball")));
        }
        p.scale = 1.0 / (m * m);
        p.min_on_ball = (0..=10_000).map(|j| p.psi_radial(j as f64 / 10_000.0)).fold(f64::INFINITY, f64::min);
        p.conv = p.tabulate_conv();
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Normalization `A` with `min_{|x| <= 1} psi = 1`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Minimum of `psi` over `|x| <= 1` on a 10^4-point radial probe.
    pub fn min_on_unit_ball(&self) -> f64 {
        self.min_on_ball
    }

    fn b(&self, r: f64) -> f64 {
        bump(2.0 * r / self.c)
    }

    /// `(F^{-1} b)(r)`, radial.
    pub fn inverse_b(&self, r: f64) -> f64 {
        let (x, w) = &self.radial;
        match self.n {
            2 => x.iter().zip(w).map(|(p, w)| w * self.b(*p) * bessel_j0(r * p) * p).sum::<f64>() / (2.0 * PI),
            _ => {
                x.iter()
                    .zip(w)
                    .map(|(p, w)| {
                        let z = r * p;
                        let sinc = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
                        w * self.b(*p) * sinc * p * p
                    })
                    .sum::<f64>()
                    / (2.0 * PI * PI)
            }
        }
    }

    pub fn psi_radial(&self, r: f64) -> f64 {
        self.scale * self.inverse_b(r).powi(2)
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        self.psi_radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    fn conv_direct(&self, r: f64) -> f64 {
        let (rho, wr) = &self.radial;
        match self.n {
            2 => {
                let m = 128;
                let mut s = 0.0;
                for (p, w) in rho.iter().zip(wr) {
                    let bp = self.b(*p);
                    let mut a = 0.0;
                    for j in 0..m {
                        let th = 2.0 * PI * j as f64 / m as f64;
                        let d2 = r * r + p * p - 2.0 * r * p * th.cos();
                        a += self.b(d2.max(0.0).sqrt());
                    }
                    s += w * bp * p * a * 2.0 * PI / m as f64;
                }
                s
            }
            _ => {
                let gl = GaussLegendre::new(64);
                let mut s = 0.0;
                for (p, w) in rho.iter().zip(wr) {
                    let bp = self.b(*p);
                    let a: f64 = gl
                        .nodes
                        .iter()
                        .zip(&gl.weights)
                        .map(|(u, wu)| wu * self.b((r * r + p * p - 2.0 * r * p * u).max(0.0).sqrt()))
                        .sum();
                    s += w * bp * p * p * a * 2.0 * PI;
                }
                s
            }
        }
    }

    fn tabulate_conv(&self) -> Vec<f64> {
        (0..=TABLE_SIZE + 2)
            .into_par_iter()
            .map(|j| {
                let r = self.c * j as f64 / TABLE_SIZE as f64;
                if r >= self.c {
                    0.0
                } else {
                    self.conv_direct(r)
                }
            })
            .collect()
    }

    /// `psi_hat(|xi| = r) = A (2 pi)^{-n} (b * b)(r)`, zero for `r >= c`.
    pub fn psi_hat_radial(&self, r: f64) -> f64 {
        if r >= self.c {
            return 0.0;
        }
        let u = r / self.c * TABLE_SIZE as f64;
        let j = u.floor() as usize;
        let t = u - j as f64;
        let y = |i: isize| -> f64 {
            // b * b is even in r.
            self.conv[i.unsigned_abs()]
        };
        let (y0, y1, y2, y3) = (y(j as isize - 1), y(j as isize), y(j as isize + 1), y(j as isize + 2));
        // Catmull-Rom interpolation.
        let v = y1
            + 0.5 * t * (y2 - y0 + t * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 + t * (3.0 * (y1 - y2) + y3 - y0)));
        self.scale * v.max(0.0) / (2.0 * PI).powi(self.n as i32)
    }

    /// Smallest radius outside which `psi^2` carries at most `frac` of its integral.
    pub fn tail_radius(&self, frac: f64) -> f64 {
        let rmax = 80.0 / self.c;
        let steps = 4000;
        let h = rmax / steps as f64;
        let dens: Vec<f64> = (0..=steps)
            .map(|j| {
                let r = j as f64 * h;
                self.psi_radial(r).powi(2) * r.powi(self.n as i32 - 1)
            })
            .collect();
        let total: f64 = dens.iter().sum();
        let mut tail = 0.0;
        for j in (0..=steps).rev() {
            tail += dens[j];
            if tail > frac * total {
                return j as f64 * h;
            }
        }
        0.0
    }
}

/// Which test function family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremizerKind {
    Full,
    Unit,
    RandomAnnulus,
}

impl ExtremizerKind {
    /// Default bump radius: 1/2 for full packets, 1 for unit packets.
    pub fn default_c(self) -> f64 {
        match self {
            Self::Full => 0.5,
            Self::Unit | Self::RandomAnnulus => 1.0,
        }
    }
}

impl fmt::Display for ExtremizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Unit => "unit",
            Self::RandomAnnulus => "random-annulus",
        })
    }
}

impl FromStr for ExtremizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "unit" => Ok(Self::Unit),
            "random-annulus" | "random" => Ok(Self::RandomAnnulus),
            _ => Err(Error::Parameter(format!("unknown extremizer type {s:?} (full, unit, random-annulus)"))),
        }
    }
}

/// Serializable description of a test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremizerSpec {
    pub kind: ExtremizerKind,
    pub n: usize,
    pub k: u32,
    pub c: f64,
    pub seed: u64,
}

/// Torus cell for a family at scale `k`: period `2 pi M_L` with `M_L` the
/// smallest power of two whose half cell covers the tail radius of the
/// family plus unit travel, and the smallest power-of-two `N` meeting the
/// Nyquist bound. A fixed `N` caps `M_L`.
pub fn cell_for(kind: ExtremizerKind, k: u32, tail_radius: f64, n: usize, fixed_points: Option<usize>) -> Result<GridSpec> {
    let reach = match kind {
        ExtremizerKind::Full => tail_radius * 2f64.powf(-(k as f64) / 2.0) + 1.0,
        ExtremizerKind::Unit => tail_radius + 1.0,
        ExtremizerKind::RandomAnnulus => 0.0,
    };
    let mut m_l = 1usize;
    while PI * (m_l as f64) < reach {
        m_l *= 2;
    }
    let outer = 2f64.powi(k as i32 + 1);
    let points = match fixed_points {
        Some(np) => {
            // Nyquist pi N / L = N / (2 M_L) must exceed 2^{k+1}.
            while m_l > 1 && (np as f64) / (2.0 * m_l as f64) <= outer {
                m_l /= 2;
            }
            np
        }
        None => {
            let mut np = 2usize;
            while (np as f64) / (2.0 * m_l as f64) <= outer {
                np *= 2;
            }
            np
        }
    };
    let grid = GridSpec::new(n, points, 2.0 * PI * m_l as f64)?;
    grid.check_annulus(k)?;
    Ok(grid)
}

/// A test function as a sparse spectrum with its per-direction components.
#[derive(Clone, Debug)]
pub struct Extremizer {
    pub spec: ExtremizerSpec,
    pub total: Spectrum,
    pub components: Vec<Spectrum>,
    /// Direction of each component (empty for random data).
    pub directions: Vec<Vec<f64>>,
    pub diagnostics: ExtremizerDiagnostics,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExtremizerDiagnostics {
    /// Largest relative `l^2` mass of a component outside the support of its `chi_nu`.
    pub containment_leak: f64,
    /// Mean `||F(component)||_1` over components.
    pub mean_fourier_l1: f64,
    pub period: f64,
    pub points: usize,
    pub lattice_points: usize,
}

impl Extremizer {
    pub fn grid(&self) -> &GridSpec {
        self.total.grid()
    }

    /// Dense space-domain field of the sum.
    pub fn field(&self) -> Result<Field> {
        self.total.to_field().inverse()
    }

    /// `f_nu` or `g_nu` as a dense space-domain field.
    pub fn component_field(&self, nu: usize) -> Result<Field> {
        self.components[nu].to_field().inverse()
    }
}

fn synthesize(
    grid: GridSpec,
    center: &[f64],
    half_box: &[f64],
    value: impl Fn(&[f64]) -> f64,
) -> Spectrum {
    let n = grid.n;
    let d = grid.dual_spacing();
    let norm = (grid.len() as f64).sqrt() / grid.period.powi(n as i32);
    let lo: Vec<i64> = (0..n).map(|a| ((center[a] - half_box[a]) / d).floor() as i64).collect();
    let hi: Vec<i64> = (0..n).map(|a| ((center[a] + half_box[a]) / d).ceil() as i64).collect();
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut m = lo.clone();
    let mut eta = vec![0.0; n];
    loop {
        for a in 0..n {
            eta[a] = m[a] as f64 * d - center[a];
        }
        let v = value(&eta);
        if v != 0.0 {
            coords.extend_from_slice(&m);
            values.push(Complex64::new(v * norm, 0.0));
        }
        let mut a = n;
        loop {
            if a == 0 {
                return Spectrum::new(grid, coords, values).expect("synthesized points lie inside the lattice box");
            }
            a -= 1;
            m[a] += 1;
            if m[a] <= hi[a] {
                break;
            }
            m[a] = lo[a];
        }
    }
}

fn containment_leak(comp: &Spectrum, nu: &[f64], radius: f64) -> f64 {
    let mut xi = vec![0.0; comp.n()];
    let mut out = 0.0;
    let mut tot = 0.0;
    for i in 0..comp.len() {
        comp.xi(i, &mut xi);
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = xi.iter().zip(nu).map(|(x, v)| (x / r - v).powi(2)).sum::<f64>().sqrt();
        let m = comp.values()[i].norm_sqr();
        tot += m;
        if d > radius {
            out += m;
        }
    }
    if tot == 0.0 {
        0.0
    } else {
        (out / tot).sqrt()
    }
}

fn assemble(spec: ExtremizerSpec, grid: GridSpec, components: Vec<Spectrum>, directions: Vec<Vec<f64>>, part_radius: f64) -> Result<Extremizer> {
    let refs: Vec<&Spectrum> = components.iter().collect();
    let total = Spectrum::sum(grid, &refs)?;
    let leak = components
        .iter()
        .zip(&directions)
        .map(|(c, nu)| containment_leak(c, nu, part_radius))
        .fold(0.0, f64::max);
    if leak > 1e-6 {
        return Err(Error::Construction(format!(
            "component mass {leak:e} lies outside its sector; use a smaller bump radius c"
        )));
    }
    let mean_l1 = components.iter().map(|c| c.fourier_l1_norm()).sum::<f64>() / components.len().max(1) as f64;
    let diagnostics = ExtremizerDiagnostics {
        containment_leak: leak,
        mean_fourier_l1: mean_l1,
        period: grid.period,
        points: grid.points,
        lattice_points: total.len(),
    };
    Ok(Extremizer { spec, total, components, directions, diagnostics })
}

/// `f = sum_nu f_nu`, `f_nu(x) = e^{i 2^k nu.x} psi(2^k nu.x nu + 2^{k/2} Pi_nu^perp x)`.
pub fn extremizer_full(k: u32, dirs: &DirectionSet, bump: &BumpProfile, grid: GridSpec) -> Result<Extremizer> {
    let n = dirs.n;
    let c = bump.c();
    let a_par = 2f64.powi(k as i32);
    let a_perp = 2f64.powf(k as f64 / 2.0);
    let det = a_par * a_perp.powi(n as i32 - 1);
    let components: Vec<Spectrum> = dirs
        .dirs
        .par_iter()
        .map(|nu| {
            let center: Vec<f64> = nu.iter().map(|v| a_par * v).collect();
            let half: Vec<f64> = nu
                .iter()
                .map(|v| ((c * a_par * v).powi(2) + (c * a_perp).powi(2) * (1.0 - v * v)).sqrt())
                .collect();
            synthesize(grid, &center, &half, |eta| {
                let par: f64 = eta.iter().zip(nu).map(|(e, v)| e * v).sum();
                let perp2 = eta.iter().map(|e| e * e).sum::<f64>() - par * par;
                let r = ((par / a_par).powi(2) + perp2.max(0.0) / (a_perp * a_perp)).sqrt();
                bump.psi_hat_radial(r) / det
            })
        })
        .collect();
    let spec = ExtremizerSpec { kind: ExtremizerKind::Full, n, k, c, seed: 0 };
    assemble(spec, grid, components, dirs.dirs.clone(), crate::partition::SUPPORT_FACTOR * dirs.delta)
}

/// `g = sum_nu g_nu`, `g_nu(x) = e^{i 2^k nu.x} psi(x)`.
pub fn extremizer_unit(k: u32, dirs: &DirectionSet, bump: &BumpProfile, grid: GridSpec) -> Result<Extremizer> {
    let n = dirs.n;
    let c = bump.c();
    let a = 2f64.powi(k as i32);
    let components: Vec<Spectrum> = dirs
        .dirs
        .par_iter()
        .map(|nu| {
            let center: Vec<f64> = nu.iter().map(|v| a * v).collect();
            synthesize(grid, &center, &vec![c; n], |eta| bump.psi_hat_radial(eta.iter().map(|e| e * e).sum::<f64>().sqrt()))
        })
        .collect();
    let spec = ExtremizerSpec { kind: ExtremizerKind::Unit, n, k, c, seed: 0 };
    assemble(spec, grid, components, dirs.dirs.clone(), crate::partition::SUPPORT_FACTOR * dirs.delta)
}

/// Unit-variance complex Gaussian coefficients on the lattice points of the
/// annulus `[2^{k-1}, 2^{k+1}]`, drawn from a seeded ChaCha8 stream in flat index order.
pub fn random_annulus(n: usize, k: u32, seed: u64, grid: GridSpec) -> Result<Extremizer> {
    grid.check_annulus(k)?;
    let lo = 2f64.powi(k as i32 - 1);
    let hi = 2f64.powi(k as i32 + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(k) << 48));
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let d = grid.dual_spacing();
    let reach = (hi / d).floor() as i64;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut m = vec![-reach; n];
    loop {
        let r = m.iter().map(|&c| (c as f64 * d).powi(2)).sum::<f64>().sqrt();
        if r >= lo && r <= hi {
            coords.extend_from_slice(&m);
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            values.push(Complex64::new(re, im));
        }
        let mut a = n;
        let done = loop {
            if a == 0 {
                break true;
            }
            a -= 1;
            m[a] += 1;
            if m[a] <= reach {
                break false;
            }
            m[a] = -reach;
        };
        if done {
            break;
        }
    }
    let total = Spectrum::new(grid, coords, values)?;
    let spec = ExtremizerSpec { kind: ExtremizerKind::RandomAnnulus, n, k, c: 0.0, seed };
    let diagnostics = ExtremizerDiagnostics {
        containment_leak: 0.0,
        mean_fourier_l1: total.fourier_l1_norm(),
        period: grid.period,
        points: grid.points,
        lattice_points: total.len(),
    };
    Ok(Extremizer { spec, total, components: Vec::new(), directions: Vec::new(), diagnostics })
}

/// Builds a family at scale `k` on its default cell (or with a fixed `N`).
pub fn build_family(kind: ExtremizerKind, n: usize, k: u32, c: Option<f64>, seed: u64, fixed_points: Option<usize>) -> Result<Extremizer> {
    let c = c.unwrap_or(kind.default_c());
    match kind {
        ExtremizerKind::RandomAnnulus => {
            let grid = cell_for(kind, k, 0.0, n, fixed_points)?;
            random_annulus(n, k, seed, grid)
        }
        _ => {
            let bump = BumpProfile::build(n, c)?;
            let grid = cell_for(kind, k, bump.tail_radius(TAIL_MASS), n, fixed_points)?;
            let dirs = DirectionSet::build(n, k)?;
            match kind {
                ExtremizerKind::Full => extremizer_full(k, &dirs, &bump, grid),
                _ => extremizer_unit(k, &dirs, &bump, grid),
            }
        }
    }
}

/// Independent `+-1` signs from a seeded ChaCha8 stream.
pub fn rademacher_signs(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// `sum_nu eps_nu components_nu`.
pub fn rademacher_sample(components: &[Spectrum], seed: u64) -> Result<Spectrum> {
    let grid = *components
        .first()
        .ok_or_else(|| Error::Parameter("no components to randomize".into()))?
        .grid();
    let signs = rademacher_signs(components.len(), seed);
    let scaled: Vec<Spectrum> = components.iter().zip(&signs).map(|(c, s)| c.scale(Complex64::new(*s, 0.0))).collect();
    let refs: Vec<&Spectrum> = scaled.iter().collect();
    Spectrum::sum(grid, &refs)
}

/// `f_eps = sum_nu eps_nu chi_nu(D) f` for given signs.
pub fn sector_sign_sum(f: &Spectrum, split: &SectorSplit, signs: &[f64]) -> Spectrum {
    let mut w = vec![0.0; f.len()];
    for (nu, (idx, wts)) in split.idx.iter().zip(&split.wts).enumerate() {
        for (&i, &x) in idx.iter().zip(wts) {
            w[i] += signs[nu] * x;
        }
    }
    f.map(|i, _, v| v * w[i])
}

/// Sector pieces `chi_nu(D) f` as components (for randomizing arbitrary data).
pub fn sector_components(f: &Spectrum, part: &SectorPartition) -> Vec<Spectrum> {
    let split = part.split(f);
    (0..part.len()).map(|nu| split.piece(f, nu)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_on_unit_ball() {
        let b = BumpProfile::build(2, 0.5).unwrap();
        assert!((b.min_on_unit_ball() - 1.0).abs() < 1e-9);
        let r = BumpProfile::build(2, 1.0).unwrap().tail_radius(1e-4);
        assert!(r > 9.0 && r < 12.0, "tail radius {r}");
        assert!(b.psi_radial(0.0) >= 1.0);
        assert_eq!(b.psi_hat_radial(0.5), 0.0);
    }

    #[test]
    fn transform_table_matches_direct_convolution() {
        let b = BumpProfile::build(2, 1.0).unwrap();
        for r in [0.0, 0.137, 0.5, 0.81] {
            let direct = b.scale() * b.conv_direct(r) / (2.0 * PI).powi(2);
            assert!((b.psi_hat_radial(r) - direct).abs() < 1e-9 * b.psi_hat_radial(0.0));
        }
    }

    #[test]
    fn cell_policy_respects_nyquist() {
        let g = cell_for(ExtremizerKind::Unit, 5, 10.4, 2, None).unwrap();
        assert_eq!(g.period, 8.0 * PI);
        assert!(g.nyquist() > 64.0);
        let err = cell_for(ExtremizerKind::RandomAnnulus, 7, 0.0, 2, Some(128)).unwrap_err();
        assert!(err.to_string().contains("Nyquist"));
    }

    #[test]
    fn signs_are_deterministic() {
        assert_eq!(rademacher_signs(16, 7), rademacher_signs(16, 7));
        assert!(rademacher_signs(64, 1).iter().all(|s| s.abs() == 1.0));
    }
}
