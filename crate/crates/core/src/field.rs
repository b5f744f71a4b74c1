use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fft_nd_unitary, FftWork, Sign};
use crate::grid::GridSpec;

/// Which representation a [`Field`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

/// Complex samples on a periodic grid.
///
/// Frequency samples use the unitary DFT convention
/// `F_m = N^{-n/2} sum_j f(x_j) exp(-i xi_m . x_j)`, so a function with
/// continuous Fourier transform `f_hat` periodized on the torus has
/// `F_m = N^{n/2} L^{-n} f_hat(xi_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    domain: Domain,
    values: Vec<Complex64>,
}

/// A frequency symbol `xi -> m(xi)`.
///
/// Implementations decide their own value at `xi = 0`.
pub trait Symbol: Sync {
    fn eval(&self, xi: &[f64]) -> Complex64;
}

impl<F> Symbol for F
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    fn eval(&self, xi: &[f64]) -> Complex64 {
        self(xi)
    }
}

/// Default oversampling for the L^p Riemann sum: 1 for `p = 2` or `p = inf`, 2 otherwise.
pub fn default_oversampling(p: f64) -> usize {
    if p == 2.0 || p.is_infinite() {
        1
    } else {
        2
    }
}

impl Field {
    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        Self { grid, domain, values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_values(grid: GridSpec, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "expected {} samples for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, domain, values })
    }

    /// Space-domain field sampled from `f(x)` at the grid points.
    pub fn from_space_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut x = vec![0.0; grid.n];
        let values = (0..grid.len())
            .map(|j| {
                grid.position(j, &mut x);
                f(&x)
            })
            .collect();
        Self { grid, domain: Domain::Space, values }
    }

    /// Frequency-domain field with coefficient `F(xi)` at each lattice point.
    pub fn from_frequency_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut xi = vec![0.0; grid.n];
        let values = (0..grid.len())
            .map(|j| {
                grid.frequency(j, &mut xi);
                f(&xi)
            })
            .collect();
        Self { grid, domain: Domain::Frequency, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn expect(&self, domain: Domain, op: &str) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{op} expects a {domain:?}-domain field, got {:?}",
                self.domain
            )))
        }
    }

    /// Unitary forward transform, space to frequency.
    pub fn forward(&self) -> Result<Field> {
        self.expect(Domain::Space, "forward_transform")?;
        let mut v = self.values.clone();
        fft_nd_unitary(&mut v, &self.grid.shape(), Sign::Forward, &mut FftWork::default());
        Ok(Field { grid: self.grid, domain: Domain::Frequency, values: v })
    }

    /// Unitary inverse transform, frequency to space.
    pub fn inverse(&self) -> Result<Field> {
        self.expect(Domain::Frequency, "inverse_transform")?;
        let mut v = self.values.clone();
        fft_nd_unitary(&mut v, &self.grid.shape(), Sign::Inverse, &mut FftWork::default());
        Ok(Field { grid: self.grid, domain: Domain::Space, values: v })
    }

    /// Pointwise product with `m` evaluated at every lattice frequency.
    pub fn apply_multiplier(&self, m: &dyn Symbol) -> Result<Field> {
        self.expect(Domain::Frequency, "apply_multiplier")?;
        let mut xi = vec![0.0; self.grid.n];
        let mut out = self.values.clone();
        for (j, v) in out.iter_mut().enumerate() {
            self.grid.frequency(j, &mut xi);
            let s = m.eval(&xi);
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(Error::Evaluation {
                    point: xi.clone(),
                    message: format!("non-finite symbol value {s}"),
                });
            }
            *v *= s;
        }
        Ok(Field { grid: self.grid, domain: Domain::Frequency, values: out })
    }

    /// Sum of `|F_m|^2` scaled to the continuous L^2 norm: `(L/N)^{n/2} ||F||_{l2}`.
    pub fn frequency_l2_norm(&self) -> Result<f64> {
        self.expect(Domain::Frequency, "frequency_l2_norm")?;
        Ok(self.grid.cell_volume().sqrt() * l2(&self.values))
    }

    /// Lattice quadrature of `(2 pi)^{-n} int |f_hat|`, i.e. `N^{-n/2} sum |F_m|`.
    pub fn fourier_l1_norm(&self) -> Result<f64> {
        self.expect(Domain::Frequency, "fourier_l1_norm")?;
        let s: f64 = self.values.iter().map(|v| v.norm()).sum();
        Ok(s / (self.grid.len() as f64).sqrt())
    }

    /// L^p norm by Riemann sum with the default oversampling.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.lp_norm_oversampled(p, default_oversampling(p))
    }

    /// L^p norm `(sum |f(x_j)|^p (L/M)^n)^{1/p}` on the grid refined by
    /// zero-padding in frequency to `M = gamma N` points per axis.
    pub fn lp_norm_oversampled(&self, p: f64, gamma: usize) -> Result<f64> {
        self.expect(Domain::Space, "lp_norm")?;
        check_p(p)?;
        if ![1, 2, 4].contains(&gamma) {
            return Err(Error::Parameter(format!("oversampling must be 1, 2 or 4, got {gamma}")));
        }
        if gamma == 1 || p == 2.0 {
            return Ok(lp_from_samples(&self.values, p, self.grid.cell_volume()));
        }
        let fine = self.refine(gamma)?;
        let vol = (self.grid.period / fine.grid.points as f64).powi(self.grid.n as i32);
        Ok(lp_from_samples(&fine.values, p, vol))
    }

    /// Trigonometric interpolation onto a grid with `gamma` times more points per axis.
    pub fn refine(&self, gamma: usize) -> Result<Field> {
        self.expect(Domain::Space, "refine")?;
        let spec = self.forward()?;
        let g = self.grid;
        let fine_grid = GridSpec::new(g.n, g.points * gamma, g.period)?;
        let scale = (gamma as f64).powf(g.n as f64 / 2.0);
        let mut fine = Field::zeros(fine_grid, Domain::Frequency);
        let mut m = vec![0i64; g.n];
        for (j, v) in spec.values.iter().enumerate() {
            g.lattice(j, &mut m);
            let idx = fine_grid.flat(&m).expect("coarse lattice inside fine lattice");
            fine.values[idx] = *v * scale;
        }
        fine.inverse()
    }

    /// Largest modulus over the samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Serialize as the binary `WPL1` format (f32 pairs, lossy).
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let mut header = [0u8; 32];
        header[0..4].copy_from_slice(MAGIC);
        header[4..8].copy_from_slice(&(self.grid.n as u32).to_le_bytes());
        header[8..12].copy_from_slice(&(self.grid.points as u32).to_le_bytes());
        let tag: u32 = match self.domain {
            Domain::Space => 0,
            Domain::Frequency => 1,
        };
        header[12..16].copy_from_slice(&tag.to_le_bytes());
        header[16..24].copy_from_slice(&self.grid.period.to_le_bytes());
        header[24..32].copy_from_slice(&(self.values.len() as u64).to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&(v.re as f32).to_le_bytes());
            buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Field> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("missing WPL1 magic".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let points = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let domain = match u32::from_le_bytes(header[12..16].try_into().unwrap()) {
            0 => Domain::Space,
            1 => Domain::Frequency,
            t => return Err(Error::Format(format!("unknown domain tag {t}"))),
        };
        let period = f64::from_le_bytes(header[16..24].try_into().unwrap());
        let count = u64::from_le_bytes(header[24..32].try_into().unwrap()) as usize;
        let grid = GridSpec::new(n, points, period)?;
        if count != grid.len() {
            return Err(Error::Format(format!("header count {count} does not match grid")));
        }
        let mut buf = vec![0u8; count * 8];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| {
                Complex64::new(
                    f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                    f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
                )
            })
            .collect();
        Ok(Field { grid, domain, values })
    }

    /// Lossless JSON form, limited to `N <= 64`.
    pub fn to_json(&self) -> Result<String> {
        if self.grid.points > 64 {
            return Err(Error::Parameter("JSON form is limited to N <= 64".into()));
        }
        let doc = FieldJson {
            magic: "WPL1".into(),
            grid: self.grid,
            domain: self.domain,
            re: self.values.iter().map(|v| v.re).collect(),
            im: self.values.iter().map(|v| v.im).collect(),
        };
        serde_json::to_string(&doc).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Field> {
        let doc: FieldJson = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if doc.magic != "WPL1" {
            return Err(Error::Format("missing WPL1 magic".into()));
        }
        let grid = GridSpec::new(doc.grid.n, doc.grid.points, doc.grid.period)?;
        if doc.re.len() != doc.im.len() {
            return Err(Error::Format("re/im length mismatch".into()));
        }
        let values = doc.re.iter().zip(&doc.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Field::from_values(grid, doc.domain, values)
    }
}

const MAGIC: &[u8; 4] = b"WPL1";

#[derive(Serialize, Deserialize)]
struct FieldJson {
    magic: String,
    grid: GridSpec,
    domain: Domain,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::Parameter(format!("exponent p = {p} must lie in [1, inf]")))
    } else {
        Ok(())
    }
}

pub(crate) fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(sum |v|^p vol)^{1/p}`, or the max modulus for `p = inf`.
pub(crate) fn lp_from_samples(v: &[Complex64], p: f64, vol: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    (power_sum(v, p) * vol).powf(1.0 / p)
}

/// `sum |v|^p` with exact integer powers for even `p`.
pub(crate) fn power_sum(v: &[Complex64], p: f64) -> f64 {
    if p == 2.0 {
        return v.iter().map(|z| z.norm_sqr()).sum();
    }
    if p.fract() == 0.0 && (p as i64) % 2 == 0 && p <= 64.0 {
        let h = (p as i32) / 2;
        return v.iter().map(|z| z.norm_sqr().powi(h)).sum();
    }
    v.iter().map(|z| z.norm().powf(p)).sum()
}
