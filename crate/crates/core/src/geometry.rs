//! Points, boxes and search kernels.
//!
//! All kernels use closed boundaries: a point at exactly the radius (or on a
//! box face) is a member.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn axis(&self, a: usize) -> f64 {
        match a {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis {a} out of range"),
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn distance_squared(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    #[inline]
    pub fn distance(&self, other: &Point3) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn translated(&self, by: &Point3) -> Point3 {
        Point3::new(self.x + by.x, self.y + by.y, self.z + by.z)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

/// Stable identifier of a point: its index in the owning [`PointCloud`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(transparent)]
pub struct PointHandle(pub u64);

impl PointHandle {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PointHandle {
    #[inline]
    fn from(i: usize) -> Self {
        PointHandle(i as u64)
    }
}

/// An ordered set of finite points. A point's handle is its position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    /// Wraps `points`, rejecting any non-finite coordinate.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "point {i} has a non-finite coordinate ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    #[inline]
    pub fn get(&self, h: PointHandle) -> &Point3 {
        &self.points[h.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointHandle, &Point3)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (PointHandle::from(i), p))
    }

    pub fn bounding_box(&self) -> Result<Aabb> {
        Aabb::from_points(&self.points)
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }
}

/// Axis-aligned box with closed faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::InvalidParameter(format!(
                "box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Per-axis extremes of `points`.
    pub fn from_points(points: &[Point3]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let mut min = *first;
        let mut max = *first;
        for p in &points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Ok(Self { min, max })
    }

    /// Box of half-width `r` around `c`.
    pub fn around(c: &Point3, r: f64) -> Self {
        Self {
            min: Point3::new(c.x - r, c.y - r, c.z - r),
            max: Point3::new(c.x + r, c.y + r, c.z + r),
        }
    }

    #[inline]
    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && self.max.x >= other.min.x
            && self.min.y <= other.max.y
            && self.max.y >= other.min.y
            && self.min.z <= other.max.z
            && self.max.z >= other.min.z
    }

    pub fn extent(&self) -> Point3 {
        Point3::new(
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        )
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }

    /// Euclidean distance from `p` to the box; zero inside.
    pub fn distance_to(&self, p: &Point3) -> f64 {
        let gap = |v: f64, lo: f64, hi: f64| (lo - v).max(0.0).max(v - hi);
        let dx = gap(p.x, self.min.x, self.max.x);
        let dy = gap(p.y, self.min.y, self.max.y);
        let dz = gap(p.z, self.min.z, self.max.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// A query region: a bounding box plus a membership test.
///
/// Every point accepted by [`Kernel::contains`] must lie inside
/// [`Kernel::bounding_box`]. Infinite box bounds are allowed and get clamped
/// to the grid at query time.
pub trait Kernel {
    fn bounding_box(&self) -> Aabb;
    fn contains(&self, p: &Point3) -> bool;
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn bounding_box(&self) -> Aabb {
        (**self).bounding_box()
    }
    fn contains(&self, p: &Point3) -> bool {
        (**self).contains(p)
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kernel radius must be positive and finite, got {radius}"
        )))
    }
}

/// Closed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereKernel {
    center: Point3,
    radius: f64,
    radius_sq: f64,
}

impl SphereKernel {
    pub fn new(center: Point3, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            center,
            radius,
            radius_sq: radius * radius,
        })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Kernel for SphereKernel {
    fn bounding_box(&self) -> Aabb {
        Aabb::around(&self.center, self.radius)
    }

    #[inline]
    fn contains(&self, p: &Point3) -> bool {
        self.center.distance_squared(p) <= self.radius_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxKernel {
    bounds: Aabb,
}

impl BoxKernel {
    pub fn new(bounds: Aabb) -> Self {
        Self { bounds }
    }

    /// Cube of half-side `half` centred on `center`.
    pub fn cube(center: Point3, half: f64) -> Result<Self> {
        check_radius(half)?;
        Ok(Self::new(Aabb::around(&center, half)))
    }
}

impl Kernel for BoxKernel {
    fn bounding_box(&self) -> Aabb {
        self.bounds
    }

    #[inline]
    fn contains(&self, p: &Point3) -> bool {
        self.bounds.contains(p)
    }
}

/// Vertical cylinder: xy distance to the axis within `radius`, z optionally
/// limited to `[z_lo, z_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderKernel {
    cx: f64,
    cy: f64,
    radius: f64,
    radius_sq: f64,
    z_lo: f64,
    z_hi: f64,
}

impl CylinderKernel {
    pub fn new(center_xy: (f64, f64), radius: f64, z_range: Option<(f64, f64)>) -> Result<Self> {
        check_radius(radius)?;
        let (z_lo, z_hi) = z_range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        if z_lo.is_nan() || z_hi.is_nan() || z_lo > z_hi {
            return Err(Error::InvalidParameter(format!(
                "cylinder z range [{z_lo}, {z_hi}] is empty"
            )));
        }
        Ok(Self {
            cx: center_xy.0,
            cy: center_xy.1,
            radius,
            radius_sq: radius * radius,
            z_lo,
            z_hi,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Kernel for CylinderKernel {
    fn bounding_box(&self) -> Aabb {
        Aabb {
            min: Point3::new(self.cx - self.radius, self.cy - self.radius, self.z_lo),
            max: Point3::new(self.cx + self.radius, self.cy + self.radius, self.z_hi),
        }
    }

    #[inline]
    fn contains(&self, p: &Point3) -> bool {
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        dx * dx + dy * dy <= self.radius_sq && p.z >= self.z_lo && p.z <= self.z_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aabb_two_points() {
        let b = Aabb::from_points(&[Point3::new(0., 0., 0.), Point3::new(10., 5., 2.)]).unwrap();
        assert_eq!(b.min, Point3::new(0., 0., 0.));
        assert_eq!(b.max, Point3::new(10., 5., 2.));
    }

    #[test]
    fn aabb_single_point_is_degenerate() {
        let p = Point3::new(1.5, -2.0, 3.25);
        let b = Aabb::from_points(&[p]).unwrap();
        assert_eq!(b.min, p);
        assert_eq!(b.max, p);
    }

    #[test]
    fn aabb_empty_is_error() {
        assert!(matches!(Aabb::from_points(&[]), Err(Error::EmptyCloud)));
        assert!(matches!(
            PointCloud::default().bounding_box(),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn aabb_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3> = (0..1000)
            .map(|_| {
                Point3::new(
                    rng.random_range(0.0..100.0),
                    rng.random_range(0.0..100.0),
                    rng.random_range(0.0..100.0),
                )
            })
            .collect();
        let b = Aabb::from_points(&pts).unwrap();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &pts {
            for a in 0..3 {
                lo[a] = lo[a].min(p.axis(a));
                hi[a] = hi[a].max(p.axis(a));
            }
        }
        assert_eq!(b.min, Point3::from(lo));
        assert_eq!(b.max, Point3::from(hi));
        assert!(b.min.x >= 0.0 && b.max.z <= 100.0);
        assert!(pts.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn cloud_rejects_nan() {
        assert!(PointCloud::new(vec![Point3::new(f64::NAN, 0., 0.)]).is_err());
        assert!(PointCloud::new(vec![Point3::new(0., f64::INFINITY, 0.)]).is_err());
    }

    #[test]
    fn sphere_box_and_boundary() {
        let s = SphereKernel::new(Point3::new(5., 5., 5.), 2.).unwrap();
        assert_eq!(
            s.bounding_box(),
            Aabb::new(Point3::new(3., 3., 3.), Point3::new(7., 7., 7.)).unwrap()
        );
        let unit = SphereKernel::new(Point3::default(), 1.).unwrap();
        assert!(unit.contains(&Point3::new(1., 0., 0.)));
        assert!(!unit.contains(&Point3::new(1., 1., 1.)));
        assert!(SphereKernel::new(Point3::default(), 0.).is_err());
        assert!(SphereKernel::new(Point3::default(), -1.).is_err());
    }

    #[test]
    fn box_kernel_is_its_own_box() {
        let b = Aabb::new(Point3::new(-1., 2., 3.), Point3::new(4., 5., 6.)).unwrap();
        let k = BoxKernel::new(b);
        assert_eq!(k.bounding_box(), b);
        assert!(k.contains(&b.min) && k.contains(&b.max));
    }

    #[test]
    fn box_kernel_agrees_with_axis_comparisons() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = BoxKernel::new(Aabb::new(Point3::new(2., 3., 4.), Point3::new(6., 5., 9.)).unwrap());
        for _ in 0..10_000 {
            let p = Point3::new(
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
            );
            let direct = (2.0..=6.0).contains(&p.x)
                && (3.0..=5.0).contains(&p.y)
                && (4.0..=9.0).contains(&p.z);
            assert_eq!(k.contains(&p), direct);
        }
    }

    #[test]
    fn cylinder_unbounded_box() {
        let c = CylinderKernel::new((1., 1.), 1., None).unwrap();
        let b = c.bounding_box();
        assert_eq!((b.min.x, b.min.y, b.max.x, b.max.y), (0., 0., 2., 2.));
        assert_eq!(b.min.z, f64::NEG_INFINITY);
        assert_eq!(b.max.z, f64::INFINITY);
        assert!(c.contains(&Point3::new(1., 2., 1e9)));
        assert!(!c.contains(&Point3::new(2., 2., 0.)));

        let bounded = CylinderKernel::new((0., 0.), 1., Some((0., 2.))).unwrap();
        assert!(bounded.contains(&Point3::new(0., 0., 2.)));
        assert!(!bounded.contains(&Point3::new(0., 0., 2.5)));
        assert!(CylinderKernel::new((0., 0.), 1., Some((3., 2.))).is_err());
    }

    fn arb_point(range: f64) -> impl Strategy<Value = Point3> {
        (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn members_lie_in_kernel_box(
            c in arb_point(50.0),
            r in 0.01f64..20.0,
            p in arb_point(60.0),
            zr in proptest::option::of((-50.0f64..0.0, 0.0f64..50.0)),
        ) {
            let sphere = SphereKernel::new(c, r).unwrap();
            if sphere.contains(&p) {
                prop_assert!(sphere.bounding_box().contains(&p));
            }
            let cube = BoxKernel::cube(c, r).unwrap();
            if cube.contains(&p) {
                prop_assert!(cube.bounding_box().contains(&p));
            }
            let cyl = CylinderKernel::new((c.x, c.y), r, zr).unwrap();
            if cyl.contains(&p) {
                prop_assert!(cyl.bounding_box().contains(&p));
            }
        }

        #[test]
        fn sphere_membership_is_rotation_invariant(
            c in arb_point(10.0),
            d in arb_point(5.0),
            r in 0.5f64..8.0,
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let k = SphereKernel::new(c, r).unwrap();
            // rotate the offset about z
            let (s, co) = theta.sin_cos();
            let rotated = Point3::new(d.x * co - d.y * s, d.x * s + d.y * co, d.z);
            let dist = d.distance(&Point3::default());
            // skip offsets within rounding of the boundary
            prop_assume!((dist - r).abs() > 1e-9);
            prop_assert_eq!(k.contains(&c.translated(&d)), k.contains(&c.translated(&rotated)));
        }
    }
}
