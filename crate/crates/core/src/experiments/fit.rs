use serde::Serialize;

use crate::error::{Error, Result};

use super::ScalingRecord;

/// Least-squares line through `(k, log2(lhs / rhs))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    /// Base-2 exponent per unit `k`.
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of a point from the line.
    pub max_residual: f64,
    pub k_min: u32,
    pub k_max: u32,
    pub points: usize,
}

pub fn fit_power_law(records: &[ScalingRecord]) -> Result<FitResult> {
    let pts: Vec<(u32, f64)> = records.iter().map(|r| (r.k, r.log2_ratio)).collect();
    fit_points(&pts)
}

/// Fits `y = intercept + slope * k`.
pub fn fit_points(pts: &[(u32, f64)]) -> Result<FitResult> {
    if pts.len() < 3 {
        return Err(Error::Parameter(format!("a power-law fit needs at least 3 scales, got {}", pts.len())));
    }
    let mut ks: Vec<u32> = pts.iter().map(|p| p.0).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() != pts.len() {
        return Err(Error::Parameter("power-law fit needs distinct k".into()));
    }
    if let Some(bad) = pts.iter().find(|p| !p.1.is_finite()) {
        return Err(Error::Numerical(format!("non-finite log ratio at k = {}", bad.0)));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0 as f64).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0 as f64).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        max_residual,
        k_min: ks[0],
        k_max: *ks.last().unwrap(),
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(u32, f64)> = (3..=7).map(|k| (k, k as f64 / 8.0)).collect();
        let f = fit_points(&pts).unwrap();
        assert!((f.slope - 0.125).abs() < 1e-14);
        assert!(f.max_residual < 1e-14);
    }

    #[test]
    fn constant_ratio_has_zero_slope() {
        let pts: Vec<(u32, f64)> = (3..=7).map(|k| (k, 0.7)).collect();
        assert!(fit_points(&pts).unwrap().slope.abs() < 1e-14);
    }

    #[test]
    fn perturbed_line() {
        let pts: Vec<(u32, f64)> = (3..=7)
            .map(|k| (k, k as f64 / 8.0 + (1.0 + 0.01 * (-1f64).powi(k as i32)).log2()))
            .collect();
        assert!((fit_points(&pts).unwrap().slope - 0.125).abs() < 0.01);
    }

    #[test]
    fn rejects_short_or_repeated_input() {
        assert!(fit_points(&[(3, 0.0), (4, 0.0)]).is_err());
        assert!(fit_points(&[(3, 0.0), (3, 0.1), (4, 0.0)]).is_err());
    }

    proptest! {
        #[test]
        fn three_point_refits_stay_within_residual_scale(slope in -1.0..1.0f64, icpt in -5.0..5.0f64, noise in proptest::collection::vec(-0.01..0.01f64, 5)) {
            let pts: Vec<(u32, f64)> = (3..=7u32).zip(&noise).map(|(k, e)| (k, icpt + slope * k as f64 + e)).collect();
            let full = fit_points(&pts).unwrap();
            prop_assert!((full.slope - slope).abs() <= 0.02);
            for w in pts.windows(3) {
                let sub = fit_points(w).unwrap();
                // Endpoint noise of size eps moves a 3-point slope by at most eps.
                prop_assert!((sub.slope - full.slope).abs() <= 0.02 + 2.0 * full.max_residual);
            }
        }
    }
}
