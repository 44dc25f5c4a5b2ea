//! Seeded instance generators shared by the benchmarks.

use powassign::PointSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` points uniform in the unit square.
pub fn uniform_square(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xy: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    PointSet::from_xy(&xy)
}

/// `clusters` tight groups of `per_cluster` points, the regime where the
/// cover coreset is much smaller than the input.
pub fn clustered(clusters: usize, per_cluster: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xy = Vec::with_capacity(clusters * per_cluster);
    for _ in 0..clusters {
        let (cx, cy): (f64, f64) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        for _ in 0..per_cluster {
            xy.push((
                cx + rng.gen_range(-0.01..0.01),
                cy + rng.gen_range(-0.01..0.01),
            ));
        }
    }
    PointSet::from_xy(&xy)
}
