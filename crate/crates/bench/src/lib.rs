//! Shared fixtures for the criterion benches.

use cheesemap::io::{generate, SyntheticKind, SyntheticSpec};
use cheesemap::{Point3, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXTENT: [f64; 3] = [100., 100., 50.];

pub fn uniform_cloud(count: usize, seed: u64) -> PointCloud {
    generate(&SyntheticSpec::sized(SyntheticKind::UniformBox, EXTENT, count, seed)).expect("valid spec")
}

pub fn lake_cloud(count: usize, seed: u64) -> PointCloud {
    generate(&SyntheticSpec::lake(count, seed)).expect("valid spec")
}

/// Seeded query centers drawn from the cloud itself.
pub fn query_centers(cloud: &PointCloud, count: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| cloud.points()[rng.random_range(0..cloud.len())])
        .collect()
}
