//! Multi-dimensional FFT driver over row-major arrays.
//!
//! One-dimensional kernels come from `rustfft`; this module applies them
//! along every axis of an array of arbitrary shape.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;
type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let key = (len, direction == FftDirection::Forward);
    if let Some(p) = guard.1.get(&key) {
        return p.clone();
    }
    let p = guard.0.plan_fft(len, direction);
    guard.1.insert(key, p.clone());
    p
}

/// Sign convention of the transform: `Forward` uses `exp(-2 pi i jk/M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Forward,
    Inverse,
}

impl Sign {
    fn direction(self) -> FftDirection {
        match self {
            Sign::Forward => FftDirection::Forward,
            Sign::Inverse => FftDirection::Inverse,
        }
    }
}

/// Reusable work buffers for [`fft_nd`].
#[derive(Default)]
pub struct FftWork {
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Unnormalized in-place n-D DFT of `data` with the given row-major shape.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], sign: Sign, work: &mut FftWork) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "array length does not match shape");
    if total == 0 {
        return;
    }
    let dims = shape.len();
    for axis in 0..dims {
        let len = shape[axis];
        if len == 1 {
            continue;
        }
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let p = plan(len, sign.direction());
        let need = p.get_inplace_scratch_len();
        if work.scratch.len() < need {
            work.scratch.resize(need, Complex64::default());
        }
        if inner == 1 {
            p.process_with_scratch(data, &mut work.scratch[..need]);
            continue;
        }
        let block = len * inner;
        if work.lines.len() < block {
            work.lines.resize(block, Complex64::default());
        }
        for o in 0..outer {
            let src = &mut data[o * block..(o + 1) * block];
            let lines = &mut work.lines[..block];
            transpose(src, lines, len, inner);
            p.process_with_scratch(lines, &mut work.scratch[..need]);
            transpose(lines, src, inner, len);
        }
    }
}

/// Unitary n-D DFT: `fft_nd` scaled by `(prod shape)^{-1/2}`.
pub fn fft_nd_unitary(data: &mut [Complex64], shape: &[usize], sign: Sign, work: &mut FftWork) {
    fft_nd(data, shape, sign, work);
    let scale = 1.0 / (data.len() as f64).sqrt();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Blocked transpose of a `rows x cols` row-major matrix into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        let r1 = (r0 + TILE).min(rows);
        for c0 in (0..cols).step_by(TILE) {
            let c1 = (c0 + TILE).min(cols);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(data: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
        let (a, b) = (shape[0], shape[1]);
        let mut out = vec![Complex64::default(); a * b];
        for k0 in 0..a {
            for k1 in 0..b {
                let mut acc = Complex64::default();
                for j0 in 0..a {
                    for j1 in 0..b {
                        let ph = -2.0 * PI * ((k0 * j0) as f64 / a as f64 + (k1 * j1) as f64 / b as f64);
                        acc += data[j0 * b + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[k0 * b + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_on_rectangular_shape() {
        let shape = [6, 10];
        let data: Vec<Complex64> = (0..60)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut fast = data.clone();
        fft_nd(&mut fast, &shape, Sign::Forward, &mut FftWork::default());
        let slow = naive(&data, &shape);
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn three_dimensional_roundtrip() {
        let shape = [4, 6, 5];
        let data: Vec<Complex64> = (0..120).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut v = data.clone();
        let mut w = FftWork::default();
        fft_nd_unitary(&mut v, &shape, Sign::Forward, &mut w);
        fft_nd_unitary(&mut v, &shape, Sign::Inverse, &mut w);
        for (x, y) in v.iter().zip(&data) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}
