//! Sparse lattice spectra and cropped-box evaluation.
//!
//! A [`Spectrum`] stores only the nonzero unitary DFT coefficients of a field
//! together with their signed lattice coordinates. Norms of such a field are
//! evaluated by demodulating the bounding box of its support to the origin and
//! transforming only that box, which gives the same Riemann sums as the full
//! grid whenever the box sampling resolves `|f|^p`.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{fft_nd, FftWork, Sign};
use crate::field::{check_p, power_sum, Domain, Field};
use crate::grid::{fast_len, GridSpec};

/// Nonzero lattice coefficients of a frequency-domain field.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coords: Vec<i64>,
    values: Vec<Complex64>,
}

impl Spectrum {
    /// Builds a spectrum from coordinates (stride `n`) and values.
    pub fn new(grid: GridSpec, coords: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if coords.len() != values.len() * grid.n {
            return Err(Error::Parameter("coordinate/value length mismatch".into()));
        }
        for c in coords.chunks_exact(grid.n) {
            if grid.flat(c).is_none() {
                return Err(Error::Parameter(format!(
                    "lattice point {c:?} lies outside the N = {} box",
                    grid.points
                )));
            }
        }
        Ok(Self { grid, coords, values })
    }

    pub fn empty(grid: GridSpec) -> Self {
        Self { grid, coords: Vec::new(), values: Vec::new() }
    }

    /// Nonzero coefficients of a frequency-domain field.
    pub fn from_field(f: &Field) -> Result<Self> {
        if f.domain() != Domain::Frequency {
            return Err(Error::Contract("expected a frequency-domain field".into()));
        }
        let grid = *f.grid();
        let mut coords = Vec::new();
        let mut values = Vec::new();
        let mut m = vec![0i64; grid.n];
        for (j, v) in f.values().iter().enumerate() {
            if *v != Complex64::default() {
                grid.lattice(j, &mut m);
                coords.extend_from_slice(&m);
                values.push(*v);
            }
        }
        Ok(Self { grid, coords, values })
    }

    pub fn to_field(&self) -> Field {
        let mut f = Field::zeros(self.grid, Domain::Frequency);
        let vals = f.values_mut();
        for (c, v) in self.coords.chunks_exact(self.grid.n).zip(&self.values) {
            vals[self.grid.flat(c).expect("checked at construction")] += *v;
        }
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &[i64] {
        &self.coords[i * self.grid.n..(i + 1) * self.grid.n]
    }

    /// Physical frequency of entry `i`.
    pub fn xi(&self, i: usize, out: &mut [f64]) {
        let d = self.grid.dual_spacing();
        for (o, c) in out.iter_mut().zip(self.coord(i)) {
            *o = d * *c as f64;
        }
    }

    pub fn radius(&self, i: usize) -> f64 {
        let d = self.grid.dual_spacing();
        self.coord(i).iter().map(|&c| (d * c as f64).powi(2)).sum::<f64>().sqrt()
    }

    /// Continuous L^2 norm (exact for the trigonometric polynomial).
    pub fn l2_norm(&self) -> f64 {
        self.grid.cell_volume().sqrt() * crate::field::l2(&self.values)
    }

    /// Lattice quadrature of `(2 pi)^{-n} int |f_hat|`.
    pub fn fourier_l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() / (self.grid.len() as f64).sqrt()
    }

    /// Entrywise map `v -> m(i, xi, v)`.
    pub fn map(&self, mut m: impl FnMut(usize, &[f64], Complex64) -> Complex64) -> Spectrum {
        let mut xi = vec![0.0; self.grid.n];
        let values = (0..self.len())
            .map(|i| {
                self.xi(i, &mut xi);
                m(i, &xi, self.values[i])
            })
            .collect();
        Spectrum { grid: self.grid, coords: self.coords.clone(), values }
    }

    /// Multiplies every coefficient by a symbol.
    pub fn apply(&self, m: impl Fn(&[f64]) -> Complex64) -> Spectrum {
        self.map(|_, xi, v| v * m(xi))
    }

    /// Sub-spectrum of the given entries with optional real weights.
    pub fn subset(&self, idx: &[usize], weights: Option<&[f64]>) -> Spectrum {
        let n = self.grid.n;
        let mut coords = Vec::with_capacity(idx.len() * n);
        let mut values = Vec::with_capacity(idx.len());
        for (j, &i) in idx.iter().enumerate() {
            coords.extend_from_slice(self.coord(i));
            let w = weights.map_or(1.0, |w| w[j]);
            values.push(self.values[i] * w);
        }
        Spectrum { grid: self.grid, coords, values }
    }

    pub fn scale(&self, s: Complex64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coords: self.coords.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Sum of spectra on the same grid, merging coincident lattice points.
    /// Entries are ordered by flat grid index, so the result does not depend
    /// on the order of `parts` beyond floating-point summation order.
    pub fn sum(grid: GridSpec, parts: &[&Spectrum]) -> Result<Spectrum> {
        let mut items: Vec<(usize, usize, usize)> = Vec::new();
        for (pi, s) in parts.iter().enumerate() {
            if s.grid != grid {
                return Err(Error::Parameter("cannot sum spectra on different grids".into()));
            }
            for i in 0..s.len() {
                items.push((grid.flat(s.coord(i)).expect("inside box"), pi, i));
            }
        }
        items.sort_unstable();
        let mut coords = Vec::new();
        let mut values: Vec<Complex64> = Vec::new();
        let mut last = usize::MAX;
        for (flat, pi, i) in items {
            let v = parts[pi].values[i];
            if flat == last {
                *values.last_mut().unwrap() += v;
            } else {
                coords.extend_from_slice(parts[pi].coord(i));
                values.push(v);
                last = flat;
            }
        }
        Ok(Spectrum { grid, coords, values })
    }

    /// Relative l^2 mass outside the annulus `r_lo <= |xi| <= r_hi`.
    pub fn mass_outside(&self, r_lo: f64, r_hi: f64) -> f64 {
        let tol = 1e-12 * if r_hi.is_finite() { r_hi } else { r_lo }.max(1.0);
        let mut out = 0.0;
        let mut tot = 0.0;
        for i in 0..self.len() {
            let m = self.values[i].norm_sqr();
            tot += m;
            let r = self.radius(i);
            if r < r_lo - tol || r > r_hi + tol {
                out += m;
            }
        }
        if tot == 0.0 {
            0.0
        } else {
            (out / tot).sqrt()
        }
    }

    /// Fails unless the spectrum lies in the dyadic annulus of scale `k`.
    pub fn check_annulus(&self, k: u32) -> Result<()> {
        let lo = 2f64.powi(k as i32 - 1);
        let hi = 2f64.powi(k as i32 + 1);
        let stray = self.mass_outside(lo, hi);
        if stray > 1e-12 {
            return Err(Error::Precondition(format!(
                "field is not supported in the annulus [{lo}, {hi}]: relative stray mass {stray:e}"
            )));
        }
        self.grid.check_annulus(k)
    }

    /// Value of the trigonometric polynomial at an arbitrary point `x`.
    pub fn eval_at(&self, x: &[f64]) -> Complex64 {
        let mut xi = vec![0.0; self.grid.n];
        let mut s = Complex64::default();
        for i in 0..self.len() {
            self.xi(i, &mut xi);
            let a: f64 = xi.iter().zip(x).map(|(u, v)| u * v).sum();
            s += self.values[i] * Complex64::from_polar(1.0, a);
        }
        s / (self.grid.len() as f64).sqrt()
    }

    /// Box sampler for the full support at oversampling `gamma`.
    pub fn sampler(&self, gamma: f64) -> BoxSampler {
        BoxSampler::new(&self.grid, &self.coords, gamma)
    }

    /// Cropped-box L^p norm.
    pub fn lp_norm(&self, p: f64, gamma: f64) -> Result<f64> {
        check_p(p)?;
        if self.is_empty() {
            return Ok(0.0);
        }
        let s = self.sampler(gamma);
        let v = s.powers(&self.values, &[p])[0];
        Ok(if p.is_infinite() { v } else { v.powf(1.0 / p) })
    }
}

thread_local! {
    static WORK: RefCell<(Vec<Complex64>, FftWork)> = RefCell::new((Vec::new(), FftWork::default()));
}

/// Samples a trigonometric polynomial supported in a lattice box on a
/// uniform grid of the torus cell, after demodulating the box to the origin.
#[derive(Clone, Debug)]
pub struct BoxSampler {
    n: usize,
    dims: Vec<usize>,
    pos: Vec<usize>,
    coef_scale: f64,
    vol: f64,
    lo: Vec<i64>,
    width: Vec<usize>,
}

impl BoxSampler {
    /// Sampler for entries at `coords` (stride `grid.n`). Each axis of width
    /// `w` is sampled at `M = fast_len(max(ceil(gamma w), w))` points.
    pub fn new(grid: &GridSpec, coords: &[i64], gamma: f64) -> Self {
        let n = grid.n;
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for c in coords.chunks_exact(n) {
            for a in 0..n {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        if coords.is_empty() {
            lo = vec![0; n];
            hi = vec![0; n];
        }
        let width: Vec<usize> = (0..n).map(|a| (hi[a] - lo[a] + 1) as usize).collect();
        let dims: Vec<usize> = width
            .iter()
            .map(|&w| fast_len(((gamma * w as f64).ceil() as usize).max(w)))
            .collect();
        Self::with_dims(grid, coords, lo, width, dims)
    }

    fn with_dims(grid: &GridSpec, coords: &[i64], lo: Vec<i64>, width: Vec<usize>, dims: Vec<usize>) -> Self {
        let n = grid.n;
        let pos = coords
            .chunks_exact(n)
            .map(|c| {
                let mut idx = 0usize;
                for a in 0..n {
                    idx = idx * dims[a] + (c[a] - lo[a]) as usize;
                }
                idx
            })
            .collect();
        let coef_scale = (grid.len() as f64).sqrt().recip();
        let vol = dims.iter().map(|&m| grid.period / m as f64).product();
        Self { n, dims, pos, coef_scale, vol, lo, width }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn width(&self) -> &[usize] {
        &self.width
    }

    pub fn lower_corner(&self) -> &[i64] {
        &self.lo
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Riemann-sum volume element of the sampling grid.
    pub fn cell_volume(&self) -> f64 {
        self.vol
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Space samples `|f(x_j)|`-equivalent values (up to a unimodular factor
    /// per sample) written into `out`.
    pub fn samples_into(&self, vals: &[Complex64], out: &mut Vec<Complex64>, work: &mut FftWork) {
        let total: usize = self.dims.iter().product();
        out.clear();
        out.resize(total, Complex64::default());
        for (p, v) in self.pos.iter().zip(vals) {
            out[*p] += *v * self.coef_scale;
        }
        fft_nd(out, &self.dims, Sign::Inverse, work);
    }

    /// For each `p` in `ps`: `sum_j |f(x_j)|^p * vol`, or the max modulus
    /// for `p = inf`. When every `p` equals 2 the exact Parseval value is
    /// returned without a transform.
    pub fn powers(&self, vals: &[Complex64], ps: &[f64]) -> Vec<f64> {
        assert_eq!(vals.len(), self.pos.len());
        if ps.iter().all(|&p| p == 2.0) {
            let s: f64 = vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.coef_scale.powi(2);
            let cell: f64 = self.vol * self.dims.iter().product::<usize>() as f64;
            return vec![s * cell; ps.len()];
        }
        WORK.with(|w| {
            let mut guard = w.borrow_mut();
            let (buf, work) = &mut *guard;
            self.samples_into(vals, buf, work);
            ps.iter()
                .map(|&p| {
                    if p.is_infinite() {
                        buf.iter().map(|z| z.norm()).fold(0.0, f64::max)
                    } else {
                        power_sum(buf, p) * self.vol
                    }
                })
                .collect()
        })
    }

    /// Maximum modulus over the sampling grid.
    pub fn max_abs(&self, vals: &[Complex64]) -> f64 {
        self.powers(vals, &[f64::INFINITY])[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_merges_coincident_points() {
        let g = GridSpec::standard(2, 16).unwrap();
        let a = Spectrum::new(g, vec![1, 2, 3, 4], vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]).unwrap();
        let b = Spectrum::new(g, vec![3, 4], vec![Complex64::new(0.5, 1.0)]).unwrap();
        let s = Spectrum::sum(g, &[&a, &b]).unwrap();
        assert_eq!(s.len(), 2);
        let f = s.to_field();
        assert_eq!(f.values()[g.flat(&[3, 4]).unwrap()], Complex64::new(2.5, 1.0));
    }

    #[test]
    fn rejects_points_outside_box() {
        let g = GridSpec::standard(2, 8).unwrap();
        assert!(Spectrum::new(g, vec![4, 0], vec![Complex64::new(1.0, 0.0)]).is_err());
    }
}
