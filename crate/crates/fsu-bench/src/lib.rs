//! Shared fixtures for the pipeline benchmarks.

use fsu_core::synthetic::sphere_cloud;
use fsu_core::{FsuConfig, PointCloud};

/// Noisy colored sphere sized for benchmark runs.
pub fn bench_sphere(n: usize) -> PointCloud {
    sphere_cloud(n, [0.5; 3], 0.4, 1e-3, 1234, true)
}

/// Block parameters matched to the bench sphere's density.
pub fn bench_config() -> FsuConfig {
    FsuConfig {
        block_size: 0.1,
        support_margin: 0.025,
        ..FsuConfig::default()
    }
}
