//! Degree-zero homogeneous partitions of unity subordinate to a direction set.

use std::f64::consts::PI;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::quad::bump;
use crate::spectrum::Spectrum;

/// Support radius of each `rho_nu`, in units of `delta`.
pub const SUPPORT_FACTOR: f64 = 1.8;

/// `chi_nu(xi) = rho_nu(xi_hat) / sum_mu rho_mu(xi_hat)` with
/// `rho_nu(w) = b(|w - nu| / (1.8 delta))`.
#[derive(Clone, Debug)]
pub struct SectorPartition {
    dirs: DirectionSet,
    radius: f64,
    dropped: Option<usize>,
    /// Half-width, in angle, of the window of candidate sectors (n = 2).
    angular_reach: f64,
}

impl SectorPartition {
    pub fn new(dirs: DirectionSet) -> Result<Self> {
        let radius = SUPPORT_FACTOR * dirs.delta;
        let angular_reach = 2.0 * (radius / 2.0).min(1.0).asin();
        let part = Self { dirs, radius, dropped: None, angular_reach };
        let probes = DirectionSet::probe_mesh(part.dirs.n, part.dirs.delta);
        let mut active = Vec::new();
        for w in &probes {
            let d = part.denominator(w, &mut active);
            if d < 1e-6 {
                return Err(Error::Construction(format!(
                    "partition denominator {d:e} at probe {w:?}: direction set is not maximal"
                )));
            }
        }
        Ok(part)
    }

    /// Builds `Theta_k` and its partition.
    pub fn build(n: usize, k: u32) -> Result<Self> {
        Self::new(DirectionSet::build(n, k)?)
    }

    /// Copy of this partition with sector `nu` removed from the output
    /// (the remaining `chi_mu` are unchanged, so they no longer sum to 1).
    pub fn with_dropped_sector(&self, nu: usize) -> Self {
        let mut p = self.clone();
        p.dropped = Some(nu);
        p
    }

    pub fn dirs(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn k(&self) -> u32 {
        self.dirs.k
    }

    pub fn n(&self) -> usize {
        self.dirs.n
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Support radius of each sector bump on the sphere.
    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    fn rho(&self, w: &[f64], nu: usize) -> f64 {
        let d = crate::directions::dist(w, &self.dirs.dirs[nu]);
        bump(d / self.radius)
    }

    /// Indices of directions that may have `rho_nu(w) > 0`.
    fn candidates(&self, w: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let m = self.dirs.len();
        if self.dirs.n == 2 {
            let step = 2.0 * PI / m as f64;
            let a = w[1].atan2(w[0]).rem_euclid(2.0 * PI);
            let centre = (a / step).round() as i64;
            let reach = (self.angular_reach / step).ceil() as i64 + 1;
            if 2 * reach + 1 >= m as i64 {
                out.extend(0..m);
                return;
            }
            for j in centre - reach..=centre + reach {
                out.push(j.rem_euclid(m as i64) as usize);
            }
        } else {
            out.extend(0..m);
        }
    }

    fn denominator(&self, w: &[f64], scratch: &mut Vec<usize>) -> f64 {
        self.candidates(w, scratch);
        scratch.iter().map(|&nu| self.rho(w, nu)).sum()
    }

    /// Active sectors at `xi` with their weights `chi_nu(xi) > 0`, in
    /// increasing direction index. Empty at `xi = 0`.
    pub fn active(&self, xi: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return;
        }
        let mut w = [0.0; 8];
        for (o, x) in w.iter_mut().zip(xi) {
            *o = x / r;
        }
        let w = &w[..xi.len()];
        let mut cand = Vec::with_capacity(8);
        self.candidates(w, &mut cand);
        cand.sort_unstable();
        cand.dedup();
        let mut total = 0.0;
        for &nu in &cand {
            let v = self.rho(w, nu);
            if v > 0.0 {
                total += v;
                out.push((nu, v));
            }
        }
        for e in out.iter_mut() {
            e.1 /= total;
        }
        if let Some(d) = self.dropped {
            out.retain(|e| e.0 != d);
        }
    }

    /// `chi_nu(xi)`.
    pub fn chi(&self, nu: usize, xi: &[f64]) -> f64 {
        let mut act = Vec::new();
        self.active(xi, &mut act);
        act.iter().find(|e| e.0 == nu).map_or(0.0, |e| e.1)
    }

    /// `sum_nu chi_nu(xi)` (1 for `xi != 0` unless a sector was dropped).
    pub fn total(&self, xi: &[f64]) -> f64 {
        let mut act = Vec::new();
        self.active(xi, &mut act);
        act.iter().map(|e| e.1).sum()
    }

    /// Splits a spectrum into its sector pieces `chi_nu(D) f`.
    pub fn split(&self, f: &Spectrum) -> SectorSplit {
        let m = self.len();
        let mut idx: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut wts: Vec<Vec<f64>> = vec![Vec::new(); m];
        let mut xi = vec![0.0; f.n()];
        let mut act = Vec::new();
        for i in 0..f.len() {
            f.xi(i, &mut xi);
            self.active(&xi, &mut act);
            for &(nu, w) in &act {
                idx[nu].push(i);
                wts[nu].push(w);
            }
        }
        SectorSplit { idx, wts }
    }
}

/// Entry lists of each sector piece of a spectrum.
#[derive(Clone, Debug)]
pub struct SectorSplit {
    pub idx: Vec<Vec<usize>>,
    pub wts: Vec<Vec<f64>>,
}

impl SectorSplit {
    /// `chi_nu(D) f` as a spectrum.
    pub fn piece(&self, f: &Spectrum, nu: usize) -> Spectrum {
        f.subset(&self.idx[nu], Some(&self.wts[nu]))
    }

    /// Indices of sectors with a nonempty piece.
    pub fn nonempty(&self) -> Vec<usize> {
        (0..self.idx.len()).filter(|&nu| !self.idx[nu].is_empty()).collect()
    }
}
