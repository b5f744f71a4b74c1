//! Positively homogeneous degree-1 phase functions `phi(xi)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A degree-1 homogeneous phase with its degree-0 gradient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhaseSymbol {
    /// `|xi|`, the half-wave phase; Hessian rank `n - 1` on the sphere.
    Euclidean,
    /// `v . xi`; Hessian rank 0.
    Linear { v: Vec<f64> },
    /// `|xi_1|`; Hessian rank 0 away from `xi_1 = 0`.
    Degenerate,
}

impl PhaseSymbol {
    /// Parses `euclidean`, `linear` (direction `e_1`), `linear:a,b,...` or `degenerate`.
    pub fn parse(name: &str, n: usize) -> Result<Self> {
        let name = name.trim();
        match name {
            "euclidean" | "abs" => Ok(Self::Euclidean),
            "degenerate" => Ok(Self::Degenerate),
            "linear" => {
                let mut v = vec![0.0; n];
                v[0] = 1.0;
                Ok(Self::Linear { v })
            }
            _ => {
                if let Some(rest) = name.strip_prefix("linear:") {
                    let v: Vec<f64> = rest
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Parameter(format!("bad linear phase vector {rest:?}")))?;
                    if v.len() != n {
                        return Err(Error::Parameter(format!("linear phase vector has {} entries, expected {n}", v.len())));
                    }
                    Ok(Self::Linear { v })
                } else {
                    Err(Error::Parameter(format!(
                        "unknown phase {name:?} (expected euclidean, linear, linear:v1,...,vn or degenerate)"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Euclidean => "euclidean".into(),
            Self::Degenerate => "degenerate".into(),
            Self::Linear { v } => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("linear:{}", parts.join(","))
            }
        }
    }

    /// `phi(xi)`, with `phi(0) = 0`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            Self::Euclidean => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Self::Linear { v } => v.iter().zip(xi).map(|(a, b)| a * b).sum(),
            Self::Degenerate => xi[0].abs(),
        }
    }

    /// `grad phi(xi)`; zero at the origin (and at `xi_1 = 0` for the degenerate phase).
    pub fn gradient(&self, xi: &[f64], out: &mut [f64]) {
        match self {
            Self::Euclidean => {
                let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
                for (o, x) in out.iter_mut().zip(xi) {
                    *o = if r > 0.0 { x / r } else { 0.0 };
                }
            }
            Self::Linear { v } => out.copy_from_slice(v),
            Self::Degenerate => {
                out.fill(0.0);
                out[0] = if xi[0] > 0.0 {
                    1.0
                } else if xi[0] < 0.0 {
                    -1.0
                } else {
                    0.0
                };
            }
        }
    }

    /// Rank of the Hessian of `phi` restricted to the sphere (exact, per instance).
    pub fn hessian_rank(&self, n: usize) -> usize {
        match self {
            Self::Euclidean => n - 1,
            Self::Linear { .. } | Self::Degenerate => 0,
        }
    }

    /// True when the rank condition `rank = n - 1` holds.
    pub fn is_curved(&self, n: usize) -> bool {
        self.hessian_rank(n) == n - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn phases() -> Vec<PhaseSymbol> {
        vec![
            PhaseSymbol::Euclidean,
            PhaseSymbol::Linear { v: vec![0.3, -1.2] },
            PhaseSymbol::Degenerate,
        ]
    }

    proptest! {
        #[test]
        fn homogeneous_of_degree_one(x in -50.0..50.0f64, y in -50.0..50.0f64, lam in 0.01..100.0f64) {
            for ph in phases() {
                let a = ph.eval(&[lam * x, lam * y]);
                let b = lam * ph.eval(&[x, y]);
                prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }

        #[test]
        fn gradient_matches_central_differences(x in 0.5..20.0f64, y in -20.0..20.0f64) {
            let h = 1e-6;
            for ph in phases() {
                let mut g = [0.0; 2];
                ph.gradient(&[x, y], &mut g);
                let dx = (ph.eval(&[x + h, y]) - ph.eval(&[x - h, y])) / (2.0 * h);
                let dy = (ph.eval(&[x, y + h]) - ph.eval(&[x, y - h])) / (2.0 * h);
                let scale = g[0].abs().max(g[1].abs()).max(1e-3);
                prop_assert!((dx - g[0]).abs() <= 1e-5 * scale);
                prop_assert!((dy - g[1]).abs() <= 1e-5 * scale);
            }
        }
    }

    #[test]
    fn parses_names_and_reports_rank() {
        assert_eq!(PhaseSymbol::parse("euclidean", 2).unwrap().hessian_rank(2), 1);
        let lin = PhaseSymbol::parse("linear:1,2", 2).unwrap();
        assert_eq!(lin.name(), "linear:1,2");
        assert_eq!(lin.hessian_rank(2), 0);
        assert!(PhaseSymbol::parse("cone", 2).is_err());
        assert!(PhaseSymbol::parse("linear:1", 2).is_err());
    }
}
