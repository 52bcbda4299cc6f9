//! Seeded instance generators shared by the benchmarks.

use oneshot_core::{FiniteDist, JointDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dist(n: usize, seed: u64) -> FiniteDist {
    let mut r = rng(seed);
    FiniteDist::from_weights((0..n).map(|_| r.gen::<f64>() + 1e-3).collect()).expect("positive weights")
}

pub fn random_joint(rows: usize, cols: usize, seed: u64) -> JointDist {
    let mut r = rng(seed);
    let w = (0..rows * cols).map(|_| r.gen::<f64>() + 1e-3).collect();
    JointDist::from_weights(rows, cols, w).expect("positive weights")
}

/// A joint where `Y` is `X` passed through a symmetric channel that keeps the symbol
/// with probability `keep`.
pub fn symmetric_joint(n: usize, keep: f64) -> JointDist {
    let off = (1.0 - keep) / (n - 1) as f64;
    let w = (0..n * n)
        .map(|i| if i / n == i % n { keep } else { off } / n as f64)
        .collect();
    JointDist::from_weights(n, n, w).expect("valid channel")
}
