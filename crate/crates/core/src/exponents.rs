//! The exponent functions `s(p)`, `sigma(p)`, `d(p)` in exact arithmetic.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// `s(p)`, `sigma(p)`, `d(p)` and `d(p) - s(p)` for dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentTriple {
    pub n: usize,
    pub p: Rational,
    pub s_p: Rational,
    pub sigma_p: Rational,
    pub d_p: Rational,
    pub gap: Rational,
}

/// Exponents at rational `p >= 2`.
///
/// `s = ((n-1)/2)|1/2 - 1/p|`; `d = 2s - 1/p` for `p >= 2(n+1)/(n-1)`, else `s`;
/// `sigma = 0` for `2 <= p <= 2n/(n-1)`, else `2s - 1/p`; `gap = max(0, s - 1/p)`.
pub fn exponents(n: usize, p: Rational) -> Result<ExponentTriple> {
    if n < 2 {
        return Err(Error::Parameter(format!("dimension n = {n} must be at least 2")));
    }
    let two = Rational::from_integer(2);
    if p < two {
        return Err(Error::Parameter(format!("p = {p} is below 2, outside the exponent range")));
    }
    let n_r = Rational::from_integer(n as i64);
    let one = Rational::from_integer(1);
    let inv_p = p.recip();
    let half = Rational::new(1, 2);
    let diff = half - inv_p;
    let abs = if diff < Rational::from_integer(0) { -diff } else { diff };
    let s_p = (n_r - one) / two * abs;
    let d_threshold = two * (n_r + one) / (n_r - one);
    let sigma_threshold = two * n_r / (n_r - one);
    let d_p = if p >= d_threshold { two * s_p - inv_p } else { s_p };
    let sigma_p = if p <= sigma_threshold { Rational::from_integer(0) } else { two * s_p - inv_p };
    let raw_gap = s_p - inv_p;
    let gap = if raw_gap > Rational::from_integer(0) { raw_gap } else { Rational::from_integer(0) };
    Ok(ExponentTriple { n, p, s_p, sigma_p, d_p, gap })
}

/// Exponents at a real `p`, converted to the nearest rational with denominator <= 10^6.
pub fn exponents_f64(n: usize, p: f64) -> Result<ExponentTriple> {
    exponents(n, to_rational(p)?)
}

/// Parses `p` as a rational: integers, decimals or `a/b`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| Error::Parameter(format!("bad rational {t:?}")))?;
        let b: i64 = b.trim().parse().map_err(|_| Error::Parameter(format!("bad rational {t:?}")))?;
        if b == 0 {
            return Err(Error::Parameter(format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(a, b));
    }
    let v: f64 = t.parse().map_err(|_| Error::Parameter(format!("bad number {t:?}")))?;
    to_rational(v)
}

pub fn to_rational(p: f64) -> Result<Rational> {
    if !p.is_finite() {
        return Err(Error::Parameter(format!("p = {p} must be finite")));
    }
    Rational::approximate_float(p)
        .filter(|r: &Rational| (to_f64(*r) - p).abs() <= 1e-12 * p.abs().max(1.0) && *r.denom() <= 1_000_000)
        .ok_or_else(|| Error::Parameter(format!("p = {p} has no small rational form")))
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl ExponentTriple {
    pub fn s(&self) -> f64 {
        to_f64(self.s_p)
    }
    pub fn sigma(&self) -> f64 {
        to_f64(self.sigma_p)
    }
    pub fn d(&self) -> f64 {
        to_f64(self.d_p)
    }
    pub fn gap_f64(&self) -> f64 {
        to_f64(self.gap)
    }
}

/// JSON form with each exponent as exact string and decimal.
#[derive(Serialize)]
pub struct ExponentRow {
    pub n: usize,
    pub p: String,
    pub s: String,
    pub sigma: String,
    pub d: String,
    pub gap: String,
    pub s_decimal: f64,
    pub sigma_decimal: f64,
    pub d_decimal: f64,
    pub gap_decimal: f64,
}

impl From<&ExponentTriple> for ExponentRow {
    fn from(e: &ExponentTriple) -> Self {
        Self {
            n: e.n,
            p: e.p.to_string(),
            s: e.s_p.to_string(),
            sigma: e.sigma_p.to_string(),
            d: e.d_p.to_string(),
            gap: e.gap.to_string(),
            s_decimal: e.s(),
            sigma_decimal: e.sigma(),
            d_decimal: e.d(),
            gap_decimal: e.gap_f64(),
        }
    }
}

impl fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} p={} s={} sigma={} d={} gap={}",
            self.n, self.p, self.s_p, self.sigma_p, self.d_p, self.gap
        )
    }
}
