use crate::geometry::{Kernel, Point3, PointCloud, PointHandle};
use crate::search::Neighbor;

/// Every point accepted by `kernel`, in handle order.
pub fn brute_radius<K: Kernel>(cloud: &PointCloud, kernel: &K) -> Vec<PointHandle> {
    cloud
        .iter()
        .filter(|(_, p)| kernel.contains(p))
        .map(|(h, _)| h)
        .collect()
}

/// The `min(k, N)` nearest points by full sort; ties broken by handle.
pub fn brute_knn(cloud: &PointCloud, c: &Point3, k: usize) -> Vec<Neighbor> {
    let mut all: Vec<(f64, PointHandle)> = cloud
        .iter()
        .map(|(h, p)| (c.distance_squared(p), h))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter()
        .map(|(d2, handle)| Neighbor {
            handle,
            distance: d2.sqrt(),
        })
        .collect()
}
