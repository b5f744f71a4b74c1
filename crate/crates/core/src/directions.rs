//! Maximal `2^{-k/2}`-separated direction sets on the unit sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A maximal `delta`-separated subset of `S^{n-1}`, `delta = 2^{-k/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub n: usize,
    pub k: u32,
    pub delta: f64,
    pub dirs: Vec<Vec<f64>>,
}

/// Relative slack for separation/covering comparisons against `delta`.
const SLACK: f64 = 1e-12;

/// Number of equally spaced directions on the circle at scale `k`:
/// the largest `m` with `2 sin(pi/m) >= 2^{-k/2}`.
pub fn circle_count(k: u32) -> usize {
    let delta = separation(k);
    let mut m = 2usize;
    while 2.0 * (PI / (m + 1) as f64).sin() >= delta * (1.0 - SLACK) {
        m += 1;
    }
    m
}

pub fn separation(k: u32) -> f64 {
    2f64.powf(-(k as f64) / 2.0)
}

impl DirectionSet {
    /// Builds `Theta_k` for `n` in {2, 3}.
    pub fn build(n: usize, k: u32) -> Result<Self> {
        let delta = separation(k);
        let dirs = match n {
            2 => {
                let m = circle_count(k);
                (0..m)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / m as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect()
            }
            3 => sphere_packing(delta),
            _ if n < 2 => return Err(Error::Parameter(format!("dimension n = {n} must be at least 2"))),
            _ => {
                return Err(Error::Unsupported(format!(
                    "direction sets are implemented for n = 2 and n = 3, not n = {n}"
                )))
            }
        };
        Ok(Self { n, k, delta, dirs })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Smallest pairwise Euclidean distance.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.dirs.len() {
            for j in i + 1..self.dirs.len() {
                best = best.min(dist(&self.dirs[i], &self.dirs[j]));
            }
        }
        best
    }

    /// Largest distance from a probe point to its nearest direction.
    pub fn covering_radius(&self, probes: &[Vec<f64>]) -> f64 {
        probes
            .iter()
            .map(|p| self.dirs.iter().map(|d| dist(p, d)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    /// Probe mesh of the sphere with spacing well below `delta`
    /// (64 points per direction on the circle, a Fibonacci set of about
    /// `40 / delta^2 * 4 pi` points on `S^2`).
    pub fn probe_mesh(n: usize, delta: f64) -> Vec<Vec<f64>> {
        match n {
            2 => {
                let count = 64 * ((2.0 * PI / delta).ceil() as usize + 1);
                (0..count)
                    .map(|j| {
                        let a = 2.0 * PI * (j as f64 + 0.5) / count as f64;
                        vec![a.cos(), a.sin()]
                    })
                    .collect()
            }
            _ => fibonacci_sphere(sphere_probe_count(delta)),
        }
    }

    /// Checks separation, and maximality on [`DirectionSet::probe_mesh`].
    pub fn verify(&self) -> Result<()> {
        let sep = self.min_separation();
        if self.len() > 1 && sep < self.delta * (1.0 - SLACK) {
            return Err(Error::Construction(format!(
                "directions are {sep} apart, below the separation {}",
                self.delta
            )));
        }
        let cover = self.covering_radius(&Self::probe_mesh(self.n, self.delta));
        if cover > self.delta * (1.0 + SLACK) {
            return Err(Error::Construction(format!(
                "probe point at distance {cover} from every direction exceeds {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("direction set serializes")
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn sphere_probe_count(delta: f64) -> usize {
    ((4.0 * PI / (delta * delta)) * 40.0).ceil() as usize + 256
}

/// Fibonacci (golden-angle) point set on `S^2`.
pub fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Farthest-point sampling of a Fibonacci candidate set down to a spacing of
/// `1.5 delta`, followed by insertion of any probe point farther than `delta`
/// from the set. The result is `delta`-separated and `delta`-covering on the probes.
fn sphere_packing(delta: f64) -> Vec<Vec<f64>> {
    let area_per_point = delta * delta;
    let candidates = fibonacci_sphere(((4.0 * PI / area_per_point) * 12.0).ceil() as usize + 64);
    let mut chosen: Vec<Vec<f64>> = vec![vec![0.0, 0.0, 1.0]];
    let mut nearest: Vec<f64> = candidates.iter().map(|c| dist(c, &chosen[0])).collect();
    let stop = 1.5 * delta;
    loop {
        let (i, d) = nearest
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if d < stop {
            break;
        }
        let c = candidates[i].clone();
        for (j, cand) in candidates.iter().enumerate() {
            nearest[j] = nearest[j].min(dist(cand, &c));
        }
        chosen.push(c);
    }
    let probes = fibonacci_sphere(sphere_probe_count(delta));
    let mut near: Vec<f64> = probes
        .iter()
        .map(|p| chosen.iter().map(|c| dist(p, c)).fold(f64::INFINITY, f64::min))
        .collect();
    loop {
        let (i, d) = near
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if d <= delta {
            break;
        }
        let c = probes[i].clone();
        for (j, p) in probes.iter().enumerate() {
            near[j] = near[j].min(dist(p, &c));
        }
        chosen.push(c);
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_counts_match_closed_form() {
        assert_eq!(circle_count(0), 6);
        assert_eq!(circle_count(4), 25);
    }

    #[test]
    fn rejects_high_dimensions() {
        assert!(matches!(DirectionSet::build(4, 2), Err(Error::Unsupported(_))));
    }
}
