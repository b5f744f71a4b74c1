use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid on the torus `[0, L)^n` with `N` points per axis.
///
/// Arrays over the grid are stored row-major with the last axis fastest.
/// Frequency index `i` along an axis denotes the lattice integer
/// `i` for `i < N/2` and `i - N` otherwise, so the lattice box is
/// `[-N/2, N/2 - 1]^n` and the physical frequency is `(2 pi / L) m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub period: f64,
}

impl GridSpec {
    pub fn new(n: usize, points: usize, period: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("dimension n = {n} must be at least 2")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "points per axis N = {points} must be a power of two >= 2"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Parameter(format!("period L = {period} must be positive")));
        }
        let total = (points as u128).checked_pow(n as u32);
        if total.map_or(true, |t| t > (1u128 << 31)) {
            return Err(Error::Parameter(format!("grid {points}^{n} is too large")));
        }
        Ok(Self { n, points, period })
    }

    /// Grid with the default period `2 pi`.
    pub fn standard(n: usize, points: usize) -> Result<Self> {
        Self::new(n, points, 2.0 * PI)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.n]
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    /// Lattice spacing `2 pi / L` in frequency.
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Volume element `(L/N)^n` of the Riemann sum.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Largest resolvable frequency `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.period
    }

    /// Fails unless the Nyquist frequency strictly exceeds `2^{k+1}`.
    pub fn check_annulus(&self, k: u32) -> Result<()> {
        let outer = 2f64.powi(k as i32 + 1);
        if self.nyquist() > outer {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "Nyquist bound violated: pi*N/L = {:.4} must exceed the annulus radius 2^(k+1) = {} (k = {k}, N = {}, L = {:.6})",
                self.nyquist(),
                outer,
                self.points,
                self.period
            )))
        }
    }

    pub fn signed(&self, i: usize) -> i64 {
        let half = self.points / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn unsigned(&self, m: i64) -> Option<usize> {
        let half = (self.points / 2) as i64;
        if m < -half || m >= half {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + self.points as i64) as usize })
    }

    /// Signed lattice coordinates of a flat index.
    pub fn lattice(&self, mut flat: usize, out: &mut [i64]) {
        for a in (0..self.n).rev() {
            out[a] = self.signed(flat % self.points);
            flat /= self.points;
        }
    }

    /// Flat index of signed lattice coordinates, if inside the box.
    pub fn flat(&self, coords: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for &m in coords.iter().take(self.n) {
            idx = idx * self.points + self.unsigned(m)?;
        }
        Some(idx)
    }

    /// Physical frequency of a flat index.
    pub fn frequency(&self, flat: usize, out: &mut [f64]) {
        let mut m = [0i64; 8];
        self.lattice(flat, &mut m[..self.n]);
        let d = self.dual_spacing();
        for a in 0..self.n {
            out[a] = d * m[a] as f64;
        }
    }

    /// Physical position of a flat index in space.
    pub fn position(&self, mut flat: usize, out: &mut [f64]) {
        let h = self.spacing();
        for a in (0..self.n).rev() {
            out[a] = h * (flat % self.points) as f64;
            flat /= self.points;
        }
    }
}

/// Smallest integer `>= m` whose only prime factors are 2, 3 and 5.
pub fn fast_len(m: usize) -> usize {
    let mut c = m.max(1);
    loop {
        let mut r = c;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return c;
        }
        c += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let g = GridSpec::standard(2, 8).unwrap();
        let mut m = [0i64; 2];
        for flat in 0..g.len() {
            g.lattice(flat, &mut m);
            assert_eq!(g.flat(&m), Some(flat));
        }
        assert_eq!(g.signed(4), -4);
        assert_eq!(g.unsigned(4), None);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::standard(1, 8).is_err());
        assert!(GridSpec::standard(2, 12).is_err());
        assert!(GridSpec::new(2, 8, -1.0).is_err());
    }

    #[test]
    fn nyquist_check_names_bound() {
        let g = GridSpec::standard(2, 64).unwrap();
        assert!(g.check_annulus(3).is_ok());
        let msg = g.check_annulus(4).unwrap_err().to_string();
        assert!(msg.contains("Nyquist"));
    }

    #[test]
    fn smooth_lengths() {
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(1026), 1080);
        assert_eq!(fast_len(1024), 1024);
        assert_eq!(fast_len(241), 243);
    }
}
