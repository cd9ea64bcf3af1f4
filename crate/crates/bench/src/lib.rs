//! Shared fixtures for the benchmarks.

use qkonc_core::analysis::uniform_angle_dataset;
use qkonc_core::rng::seeded;

/// `n_s` seeded inputs with components uniform on `[0, 2pi)`.
pub fn inputs(n_s: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    uniform_angle_dataset(n_s, dim, &mut seeded(seed))
}
