//! Seeded synthetic clouds.
//!
//! All generators draw from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so output is identical across platforms for a given spec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, PointCloud};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SyntheticKind {
    /// Uniform points in the box.
    UniformBox,
    /// Uniform points with no point inside an elliptic cylinder through the
    /// whole z range (a lake in an aerial scan).
    VoidEllipse {
        center: (f64, f64),
        semi_axes: (f64, f64),
    },
    /// Isotropic Gaussian blobs around uniform centres, clipped to the box.
    GaussianClusters { clusters: usize, sigma: f64 },
    /// A thin ground layer plus a few tall square towers reaching the top of
    /// the box. The first two points sit on the box corners so the cloud's
    /// bounding box equals the extents exactly.
    Towers { towers: usize, ground_height: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub extent: Aabb,
    pub count: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn uniform(extent: Aabb, count: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::UniformBox,
            extent,
            count,
            seed,
        }
    }

    /// Box `[0, sx] × [0, sy] × [0, sz]`.
    pub fn sized(kind: SyntheticKind, size: [f64; 3], count: usize, seed: u64) -> Self {
        Self {
            kind,
            extent: Aabb {
                min: Point3::default(),
                max: Point3::from(size),
            },
            count,
            seed,
        }
    }

    /// A 100 × 60 × 10 m scene with an elliptic void of semi-axes 30 × 18 m
    /// in the middle, like a lake in an aerial scan.
    pub fn lake(count: usize, seed: u64) -> Self {
        let kind = SyntheticKind::VoidEllipse {
            center: (50., 30.),
            semi_axes: (30., 18.),
        };
        Self::sized(kind, [100., 60., 10.], count, seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.count == 0 {
            return bad("synthetic point count must be positive".into());
        }
        let e = self.extent.extent();
        if !(e.x > 0.0 && e.y > 0.0 && e.z > 0.0) || !self.extent.min.is_finite() || !self.extent.max.is_finite() {
            return bad(format!("synthetic extent {:?} must be positive and finite", self.extent));
        }
        match &self.kind {
            SyntheticKind::UniformBox => {}
            SyntheticKind::VoidEllipse { center, semi_axes } => {
                let (cx, cy) = *center;
                let (a, b) = *semi_axes;
                if !(a > 0.0 && b > 0.0) {
                    return bad("ellipse semi-axes must be positive".into());
                }
                let b0 = &self.extent;
                if cx - a < b0.min.x || cx + a > b0.max.x || cy - b < b0.min.y || cy + b > b0.max.y {
                    return bad("void ellipse must lie inside the extent".into());
                }
            }
            SyntheticKind::GaussianClusters { clusters, sigma } => {
                if *clusters == 0 || !(*sigma > 0.0 && sigma.is_finite()) {
                    return bad("clusters need a positive count and sigma".into());
                }
            }
            SyntheticKind::Towers { towers, ground_height } => {
                if !(*ground_height > 0.0 && *ground_height <= e.z) {
                    return bad("ground height must lie in (0, extent z]".into());
                }
                if *towers == 0 && self.count < 2 {
                    return bad("tower scene needs at least two points".into());
                }
            }
        }
        Ok(())
    }
}

/// Draws the cloud described by `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let b = spec.extent;
    let uniform = |rng: &mut ChaCha8Rng| {
        Point3::new(
            rng.random_range(b.min.x..=b.max.x),
            rng.random_range(b.min.y..=b.max.y),
            rng.random_range(b.min.z..=b.max.z),
        )
    };

    let mut points = Vec::with_capacity(spec.count);
    match &spec.kind {
        SyntheticKind::UniformBox => {
            points.extend((0..spec.count).map(|_| uniform(&mut rng)));
        }
        SyntheticKind::VoidEllipse { center, semi_axes } => {
            while points.len() < spec.count {
                let p = uniform(&mut rng);
                if !inside_ellipse(&p, *center, *semi_axes) {
                    points.push(p);
                }
            }
        }
        SyntheticKind::GaussianClusters { clusters, sigma } => {
            let centres: Vec<Point3> = (0..*clusters).map(|_| uniform(&mut rng)).collect();
            let noise = Normal::new(0.0, *sigma).expect("validated sigma");
            while points.len() < spec.count {
                let c = centres[rng.random_range(0..centres.len())];
                let p = Point3::new(
                    c.x + noise.sample(&mut rng),
                    c.y + noise.sample(&mut rng),
                    c.z + noise.sample(&mut rng),
                );
                if b.contains(&p) {
                    points.push(p);
                }
            }
        }
        SyntheticKind::Towers { towers, ground_height } => {
            points.push(b.min);
            points.push(b.max);
            let side = 5.0f64.min(b.extent().x).min(b.extent().y);
            let bases: Vec<(f64, f64)> = (0..*towers)
                .map(|_| {
                    (
                        rng.random_range(b.min.x..=b.max.x - side),
                        rng.random_range(b.min.y..=b.max.y - side),
                    )
                })
                .collect();
            let ground_top = b.min.z + ground_height;
            while points.len() < spec.count {
                // one point in fifty belongs to a tower
                let p = if !bases.is_empty() && rng.random_range(0..50) == 0 {
                    let (x0, y0) = bases[rng.random_range(0..bases.len())];
                    Point3::new(
                        rng.random_range(x0..=x0 + side),
                        rng.random_range(y0..=y0 + side),
                        rng.random_range(b.min.z..=b.max.z),
                    )
                } else {
                    Point3::new(
                        rng.random_range(b.min.x..=b.max.x),
                        rng.random_range(b.min.y..=b.max.y),
                        rng.random_range(b.min.z..=ground_top),
                    )
                };
                points.push(p);
            }
            points.truncate(spec.count);
        }
    }
    PointCloud::new(points)
}

/// Closed ellipse test in the xy plane.
fn inside_ellipse(p: &Point3, (cx, cy): (f64, f64), (a, b): (f64, f64)) -> bool {
    let u = (p.x - cx) / a;
    let v = (p.y - cy) / b;
    u * u + v * v <= 1.0
}
