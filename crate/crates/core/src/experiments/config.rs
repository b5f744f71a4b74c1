use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremizers::ExtremizerKind;
use crate::grid::GridSpec;
use crate::phase::PhaseSymbol;
use crate::window::WINDOW_RANGE;

/// Which scaling sweep to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Space-time norm against the discrete FIO-Hardy norm (lower bound on `s`).
    Sharpness,
    /// Time-integrated square function against the discrete norm.
    Squarefunction,
    /// Space-time norm against the windowed decoupling sum.
    Decoupling,
    /// Space-time norm against the discrete norm at regularity `d(p) - s(p)`.
    LocalSmoothing,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [Self::Sharpness, Self::Squarefunction, Self::Decoupling, Self::LocalSmoothing];
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sharpness => "sharpness",
            Self::Squarefunction => "squarefunction",
            Self::Decoupling => "decoupling",
            Self::LocalSmoothing => "local-smoothing",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown experiment {s:?} (sharpness, squarefunction, decoupling, local-smoothing)")))
    }
}

/// A scaling sweep over `k_min..=k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub p: f64,
    /// `euclidean`, `linear`, `linear:v1,...,vn` or `degenerate`.
    pub phase: String,
    pub k_min: u32,
    pub k_max: u32,
    /// Points per axis; chosen per `k` from the cell policy when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Oversampling of the cropped-box `L^p` quadrature.
    pub gamma: f64,
    /// Trapezoid intervals on `[0, 1]`; `max(64, 8 * 2^k)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_intervals: Option<usize>,
    pub extremizer: ExtremizerKind,
    /// Bump radius; family default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Regularity offset added to the right-hand side's `s`.
    pub s: f64,
    pub seed: u64,
    /// Sign patterns averaged in the Khintchine side check.
    pub khintchine_samples: usize,
    /// Truncation interval of the time integral over `R`.
    pub window: (f64, f64),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults_for(ExperimentKind::Sharpness)
    }
}

impl ExperimentConfig {
    pub fn defaults_for(kind: ExperimentKind) -> Self {
        let (p, extremizer) = match kind {
            ExperimentKind::Sharpness => (12.0, ExtremizerKind::Full),
            ExperimentKind::Squarefunction => (4.0, ExtremizerKind::Unit),
            ExperimentKind::Decoupling => (6.0, ExtremizerKind::Full),
            ExperimentKind::LocalSmoothing => (12.0, ExtremizerKind::Full),
        };
        Self {
            experiment: kind,
            n: 2,
            p,
            phase: "euclidean".into(),
            k_min: 3,
            k_max: 7,
            points: None,
            gamma: 2.0,
            time_intervals: None,
            extremizer,
            c: None,
            s: 0.0,
            seed: 1,
            khintchine_samples: 64,
            window: WINDOW_RANGE,
        }
    }

    pub fn phase_symbol(&self) -> Result<PhaseSymbol> {
        PhaseSymbol::parse(&self.phase, self.n)
    }

    /// Checks every field before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Parameter(format!("config field `{field}`: {msg}")));
        let inner = |e: Error| match e {
            Error::Parameter(m) | Error::Unsupported(m) => m,
            e => e.to_string(),
        };
        if !(2..=3).contains(&self.n) {
            return bad("n", format!("dimension {} is not supported (2 or 3)", self.n));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return bad("p", format!("p = {} must lie in [2, inf)", self.p));
        }
        if self.k_min > self.k_max {
            return bad("k_min", format!("k_min = {} exceeds k_max = {}", self.k_min, self.k_max));
        }
        if self.k_max - self.k_min < 2 {
            return bad("k_max", "a slope fit needs at least 3 scales".into());
        }
        if self.k_max > 12 {
            return bad("k_max", format!("k_max = {} is beyond desk scale", self.k_max));
        }
        if ![1.0, 1.5, 2.0, 3.0, 4.0].contains(&self.gamma) {
            return bad("gamma", format!("oversampling {} not in {{1, 1.5, 2, 3, 4}}", self.gamma));
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c <= 1.0) {
                return bad("c", format!("bump radius {c} must lie in (0, 1]"));
            }
        }
        if let Some(m) = self.time_intervals {
            if m < 2 {
                return bad("time_intervals", "need at least 2 intervals".into());
            }
        }
        if !(self.window.0 < 0.0 && self.window.1 > 1.0) {
            return bad("window", format!("interval {:?} must contain [0, 1]", self.window));
        }
        if self.experiment == ExperimentKind::Squarefunction && self.khintchine_samples == 0 {
            return bad("khintchine_samples", "need at least one sign pattern".into());
        }
        if let Err(e) = self.phase_symbol() {
            return bad("phase", inner(e));
        }
        if let Some(np) = self.points {
            if !np.is_power_of_two() {
                return bad("points", format!("N = {np} must be a power of two"));
            }
            GridSpec::standard(self.n, np)?
                .check_annulus(self.k_max)
                .or_else(|e| bad("k_max", inner(e)))?;
        }
        Ok(())
    }

    pub fn ks(&self) -> Vec<u32> {
        (self.k_min..=self.k_max).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for k in ExperimentKind::ALL {
            ExperimentConfig::defaults_for(k).validate().unwrap();
            assert_eq!(k.to_string().parse::<ExperimentKind>().unwrap(), k);
        }
    }

    #[test]
    fn nyquist_violation_names_bound() {
        let c = ExperimentConfig { points: Some(128), ..Default::default() };
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("Nyquist") && msg.contains("k_max"), "{msg}");
    }

    #[test]
    fn rejects_two_point_range() {
        let c = ExperimentConfig { k_min: 3, k_max: 4, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
