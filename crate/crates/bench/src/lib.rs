//! Shared inputs for the pipeline benchmarks.

use wpl_core::extremizers::random_annulus;
use wpl_core::{GridSpec, SectorPartition, Spectrum};

/// Seeded random annulus data at scale `k` on an `N x N` grid with its partition.
pub fn annulus_input(k: u32, points: usize) -> (Spectrum, SectorPartition) {
    let grid = GridSpec::standard(2, points).expect("valid grid");
    let f = random_annulus(2, k, 1, grid).expect("annulus fits the grid").total;
    let part = SectorPartition::build(2, k).expect("partition");
    (f, part)
}
