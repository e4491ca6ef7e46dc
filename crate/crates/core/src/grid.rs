//! Regular voxel grid over a cloud's bounding box.
//!
//! Voxels are half-open `[lo, lo + s)` per axis. The grid holds
//! `floor(extent / s) + 1` voxels per axis, so the upper corner of the box
//! still falls inside the last voxel. In [`GridMode::TwoD`] the z axis is not
//! indexed: `n_z = 1` and every voxel spans the whole z range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3};

/// Hard ceiling on the number of voxels a grid may address.
pub const MAX_GRID_VOXELS: u128 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridMode {
    TwoD,
    ThreeD,
}

impl GridMode {
    /// Number of axes used for indexing.
    pub fn indexed_axes(self) -> usize {
        match self {
            GridMode::TwoD => 2,
            GridMode::ThreeD => 3,
        }
    }
}

/// Per-axis voxel edge length in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSize {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CellSize {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for s in [x, y, z] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "cell size must be positive and finite, got {s}"
                )));
            }
        }
        Ok(Self { x, y, z })
    }

    pub fn uniform(s: f64) -> Result<Self> {
        Self::new(s, s, s)
    }

    #[inline]
    pub fn axis(&self, a: usize) -> f64 {
        match a {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct VoxelCoord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl VoxelCoord {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }

    #[inline]
    pub fn axis(&self, a: usize) -> usize {
        match a {
            0 => self.i,
            1 => self.j,
            _ => self.k,
        }
    }
}

/// Inclusive box of voxel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexRange {
    pub lo: VoxelCoord,
    pub hi: VoxelCoord,
}

impl IndexRange {
    pub fn new(lo: VoxelCoord, hi: VoxelCoord) -> Self {
        debug_assert!(lo.i <= hi.i && lo.j <= hi.j && lo.k <= hi.k);
        Self { lo, hi }
    }

    pub fn voxel_count(&self) -> usize {
        (self.hi.i - self.lo.i + 1) * (self.hi.j - self.lo.j + 1) * (self.hi.k - self.lo.k + 1)
    }

    #[inline]
    pub fn contains(&self, v: &VoxelCoord) -> bool {
        (self.lo.i..=self.hi.i).contains(&v.i)
            && (self.lo.j..=self.hi.j).contains(&v.j)
            && (self.lo.k..=self.hi.k).contains(&v.k)
    }

    /// True when `other` lies entirely inside `self`.
    pub fn covers(&self, other: &IndexRange) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    /// Smallest range containing both.
    pub fn hull(&self, other: &IndexRange) -> IndexRange {
        IndexRange {
            lo: VoxelCoord::new(
                self.lo.i.min(other.lo.i),
                self.lo.j.min(other.lo.j),
                self.lo.k.min(other.lo.k),
            ),
            hi: VoxelCoord::new(
                self.hi.i.max(other.hi.i),
                self.hi.j.max(other.hi.j),
                self.hi.k.max(other.hi.k),
            ),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = VoxelCoord> {
        let IndexRange { lo, hi } = *self;
        (lo.i..=hi.i).flat_map(move |i| {
            (lo.j..=hi.j).flat_map(move |j| (lo.k..=hi.k).map(move |k| VoxelCoord::new(i, j, k)))
        })
    }
}

/// Grid geometry: origin `p⁻`, upper corner `p⁺`, cell size and voxel counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    bounds: Aabb,
    cell: CellSize,
    dims: [usize; 3],
    mode: GridMode,
}

impl GridParams {
    pub fn new(bounds: Aabb, cell: CellSize, mode: GridMode) -> Result<Self> {
        let mut dims = [1usize; 3];
        let mut total: u128 = 1;
        for (a, dim) in dims.iter_mut().enumerate().take(mode.indexed_axes()) {
            let span = bounds.max.axis(a) - bounds.min.axis(a);
            let n = (span / cell.axis(a)).floor() + 1.0;
            if n.is_nan() || n >= MAX_GRID_VOXELS as f64 {
                return Err(grid_too_large(u128::MAX));
            }
            *dim = n as usize;
            total = total.saturating_mul(*dim as u128);
        }
        if total > MAX_GRID_VOXELS {
            return Err(grid_too_large(total));
        }
        Ok(Self {
            bounds,
            cell,
            dims,
            mode,
        })
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn origin(&self) -> &Point3 {
        &self.bounds.min
    }

    pub fn cell(&self) -> &CellSize {
        &self.cell
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn total_voxels(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Voxels in one z slice (`n_x · n_y`).
    pub fn slice_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// Largest cell edge over the indexed axes.
    pub fn max_cell(&self) -> f64 {
        (0..self.mode.indexed_axes())
            .map(|a| self.cell.axis(a))
            .fold(0.0, f64::max)
    }

    pub fn full_range(&self) -> IndexRange {
        IndexRange::new(
            VoxelCoord::default(),
            VoxelCoord::new(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1),
        )
    }

    /// Voxel containing `p`, or an error when `p` is outside the box.
    pub fn voxel_of_point(&self, p: &Point3) -> Result<VoxelCoord> {
        for a in 0..self.mode.indexed_axes() {
            let v = p.axis(a);
            if !(v >= self.bounds.min.axis(a) && v <= self.bounds.max.axis(a)) {
                return Err(Error::OutOfDomain {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                });
            }
        }
        Ok(self.cell_of(p))
    }

    /// Voxel of a point known to be inside the box.
    #[inline]
    pub(crate) fn cell_of(&self, p: &Point3) -> VoxelCoord {
        let idx = |a: usize| {
            let t = ((p.axis(a) - self.bounds.min.axis(a)) / self.cell.axis(a)).floor();
            (t as usize).min(self.dims[a] - 1)
        };
        match self.mode {
            GridMode::TwoD => VoxelCoord::new(idx(0), idx(1), 0),
            GridMode::ThreeD => VoxelCoord::new(idx(0), idx(1), idx(2)),
        }
    }

    /// Row-major flattening: `i·(n_y·n_z) + j·n_z + k`, which reduces to
    /// `i·n_y + j` in 2D since `n_z = 1` and `k = 0`.
    #[inline]
    pub fn global_index(&self, v: &VoxelCoord) -> usize {
        let [_, ny, nz] = self.dims;
        v.i * (ny * nz) + v.j * nz + v.k
    }

    #[inline]
    pub fn voxel_of_global(&self, g: usize) -> VoxelCoord {
        let [_, ny, nz] = self.dims;
        VoxelCoord::new(g / (ny * nz), (g / nz) % ny, g % nz)
    }

    pub fn voxel_bounds(&self, v: &VoxelCoord) -> Aabb {
        let lo = |a: usize, i: usize| self.bounds.min.axis(a) + i as f64 * self.cell.axis(a);
        let hi = |a: usize, i: usize| self.bounds.min.axis(a) + (i + 1) as f64 * self.cell.axis(a);
        let (zlo, zhi) = match self.mode {
            GridMode::TwoD => (self.bounds.min.z, self.bounds.max.z),
            GridMode::ThreeD => (lo(2, v.k), hi(2, v.k)),
        };
        Aabb {
            min: Point3::new(lo(0, v.i), lo(1, v.j), zlo),
            max: Point3::new(hi(0, v.i), hi(1, v.j), zhi),
        }
    }

    /// Voxels overlapping `query`, clamped to the grid. `None` when the query
    /// box misses the grid's bounding box entirely.
    pub fn clamped_range(&self, query: &Aabb) -> Option<IndexRange> {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..self.mode.indexed_axes() {
            let (qmin, qmax) = (query.min.axis(a), query.max.axis(a));
            if qmax < self.bounds.min.axis(a) || qmin > self.bounds.max.axis(a) {
                return None;
            }
            lo[a] = self.clamp_index(a, qmin);
            hi[a] = self.clamp_index(a, qmax);
        }
        Some(IndexRange::new(VoxelCoord::from_array(lo), VoxelCoord::from_array(hi)))
    }

    #[inline]
    fn clamp_index(&self, a: usize, v: f64) -> usize {
        let t = ((v - self.bounds.min.axis(a)) / self.cell.axis(a)).floor();
        let last = self.dims[a] - 1;
        if t <= 0.0 {
            0
        } else if t >= last as f64 {
            last
        } else {
            t as usize
        }
    }
}

impl VoxelCoord {
    fn from_array(a: [usize; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

fn grid_too_large(voxels: u128) -> Error {
    Error::Capacity {
        voxels,
        cap: MAX_GRID_VOXELS,
        hint: "use a larger cell size",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn cube_grid(side: f64, s: f64, mode: GridMode) -> GridParams {
        let b = Aabb::new(Point3::default(), Point3::new(side, side, side)).unwrap();
        GridParams::new(b, CellSize::uniform(s).unwrap(), mode).unwrap()
    }

    #[test]
    fn dims_of_cube() {
        assert_eq!(cube_grid(10., 2.5, GridMode::ThreeD).dims(), [5, 5, 5]);
    }

    #[test]
    fn dims_of_tall_scene() {
        let b = Aabb::new(Point3::default(), Point3::new(500., 500., 168.4)).unwrap();
        let s = CellSize::uniform(1.0).unwrap();
        let g3 = GridParams::new(b, s, GridMode::ThreeD).unwrap();
        assert_eq!(g3.dims(), [501, 501, 169]);
        assert_eq!(g3.total_voxels(), 42_419_169);
        let g2 = GridParams::new(b, s, GridMode::TwoD).unwrap();
        assert_eq!(g2.dims(), [501, 501, 1]);
        assert_eq!(g2.total_voxels(), 251_001);
    }

    #[test]
    fn oversized_grid_is_capacity_error() {
        let b = Aabb::new(Point3::default(), Point3::new(1e7, 1e7, 1e7)).unwrap();
        let err = GridParams::new(b, CellSize::uniform(1e-3).unwrap(), GridMode::ThreeD);
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn point_to_voxel() {
        let g = cube_grid(10., 2.5, GridMode::ThreeD);
        assert_eq!(
            g.voxel_of_point(&Point3::new(3.7, 0.2, 9.9)).unwrap(),
            VoxelCoord::new(1, 0, 3)
        );
        assert_eq!(g.voxel_of_point(&Point3::default()).unwrap(), VoxelCoord::new(0, 0, 0));
        assert_eq!(
            g.voxel_of_point(&Point3::new(10., 10., 10.)).unwrap(),
            VoxelCoord::new(4, 4, 4)
        );
        assert!(matches!(
            g.voxel_of_point(&Point3::new(10.1, 0., 0.)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn two_d_ignores_z() {
        let g = cube_grid(10., 2.5, GridMode::TwoD);
        assert_eq!(g.dims(), [5, 5, 1]);
        assert_eq!(
            g.voxel_of_point(&Point3::new(3.7, 0.2, 9.9)).unwrap(),
            VoxelCoord::new(1, 0, 0)
        );
        let b = g.voxel_bounds(&VoxelCoord::new(1, 0, 0));
        assert_eq!((b.min.z, b.max.z), (0., 10.));
    }

    #[test]
    fn flattening() {
        let g = cube_grid(10., 2.5, GridMode::ThreeD);
        assert_eq!(g.global_index(&VoxelCoord::new(1, 0, 3)), 28);
        assert_eq!(g.global_index(&VoxelCoord::new(0, 0, 0)), 0);
        let g2 = cube_grid(10., 2.5, GridMode::TwoD);
        assert_eq!(g2.global_index(&VoxelCoord::new(2, 3, 0)), 13);
    }

    #[test]
    fn flattening_is_a_bijection() {
        let b = Aabb::new(Point3::default(), Point3::new(99., 49., 19.)).unwrap();
        for mode in [GridMode::TwoD, GridMode::ThreeD] {
            let g = GridParams::new(b, CellSize::new(1., 0.5, 0.25).unwrap(), mode).unwrap();
            assert!(g.total_voxels() <= 1_000_000);
            let mut seen = vec![false; g.total_voxels()];
            for v in g.full_range().iter() {
                let idx = g.global_index(&v);
                assert!(!seen[idx], "duplicate index {idx}");
                seen[idx] = true;
                assert_eq!(g.voxel_of_global(idx), v);
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn voxel_bounds_values() {
        let g = cube_grid(10., 2.5, GridMode::ThreeD);
        let b = g.voxel_bounds(&VoxelCoord::new(1, 0, 3));
        assert_eq!(b.min, Point3::new(2.5, 0.0, 7.5));
        assert_eq!(b.max, Point3::new(5.0, 2.5, 10.0));
        assert_eq!(g.voxel_bounds(&VoxelCoord::default()).min, Point3::default());
    }

    #[test]
    fn voxel_center_round_trips() {
        let b = Aabb::new(Point3::new(-3., 1., 2.), Point3::new(7., 9., 5.)).unwrap();
        let g = GridParams::new(b, CellSize::new(0.7, 1.1, 0.4).unwrap(), GridMode::ThreeD).unwrap();
        for v in g.full_range().iter() {
            let c = g.voxel_bounds(&v).center();
            // centres of the outermost voxels may lie past p⁺
            if b.contains(&c) {
                assert_eq!(g.voxel_of_point(&c).unwrap(), v);
            } else {
                assert_eq!(g.cell_of(&c), v);
            }
        }
    }

    #[test]
    fn seeded_points_lie_in_their_voxel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..5000)
            .map(|_| {
                Point3::new(
                    rng.random_range(0.0..37.0),
                    rng.random_range(0.0..21.0),
                    rng.random_range(0.0..9.0),
                )
            })
            .collect();
        let b = Aabb::from_points(&pts).unwrap();
        let g = GridParams::new(b, CellSize::uniform(1.3).unwrap(), GridMode::ThreeD).unwrap();
        for p in &pts {
            let vb = g.voxel_bounds(&g.voxel_of_point(p).unwrap());
            assert!(p.x >= vb.min.x && p.x < vb.max.x);
            assert!(p.y >= vb.min.y && p.y < vb.max.y);
            assert!(p.z >= vb.min.z && p.z < vb.max.z);
        }
        // the upper corner is the single closed exception
        let top = g.voxel_of_point(&b.max).unwrap();
        assert_eq!(top, VoxelCoord::new(g.dims()[0] - 1, g.dims()[1] - 1, g.dims()[2] - 1));
    }

    #[test]
    fn clamped_ranges() {
        let g = cube_grid(10., 2.5, GridMode::ThreeD);
        let r = g
            .clamped_range(&Aabb::around(&Point3::new(5., 5., 5.), 2.))
            .unwrap();
        assert_eq!(r.lo, VoxelCoord::new(1, 1, 1));
        assert_eq!(r.hi, VoxelCoord::new(2, 2, 2));

        let left = Aabb::new(Point3::new(-5., 0., 0.), Point3::new(-1., 10., 10.)).unwrap();
        assert!(g.clamped_range(&left).is_none());

        let partial = Aabb::new(Point3::new(6., 6., 6.), Point3::new(30., 30., 30.)).unwrap();
        let r = g.clamped_range(&partial).unwrap();
        assert_eq!(r.lo, VoxelCoord::new(2, 2, 2));
        assert_eq!(r.hi, VoxelCoord::new(4, 4, 4));
    }

    #[test]
    fn clamped_range_handles_infinite_bounds() {
        let g = cube_grid(10., 2.5, GridMode::ThreeD);
        let q = Aabb {
            min: Point3::new(0., 0., f64::NEG_INFINITY),
            max: Point3::new(2., 2., f64::INFINITY),
        };
        let r = g.clamped_range(&q).unwrap();
        assert_eq!(r.lo, VoxelCoord::new(0, 0, 0));
        assert_eq!(r.hi, VoxelCoord::new(0, 0, 4));
    }

    #[test]
    fn range_hull_and_count() {
        let a = IndexRange::new(VoxelCoord::new(1, 1, 1), VoxelCoord::new(2, 2, 2));
        let b = IndexRange::new(VoxelCoord::new(0, 2, 1), VoxelCoord::new(1, 3, 1));
        let h = a.hull(&b);
        assert_eq!(h.lo, VoxelCoord::new(0, 1, 1));
        assert_eq!(h.hi, VoxelCoord::new(2, 3, 2));
        assert!(h.covers(&a) && h.covers(&b));
        assert_eq!(a.voxel_count(), 8);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 8);
    }

    proptest! {
        #[test]
        fn clamped_range_matches_unclamped_intersection(
            x0 in -20.0f64..30.0, dx in 0.0f64..25.0,
            y0 in -20.0f64..30.0, dy in 0.0f64..25.0,
            z0 in -20.0f64..30.0, dz in 0.0f64..25.0,
        ) {
            let g = cube_grid(10., 2.5, GridMode::ThreeD);
            let q = Aabb::new(Point3::new(x0, y0, z0), Point3::new(x0 + dx, y0 + dy, z0 + dz)).unwrap();
            let disjoint = !q.intersects(g.bounds());
            match g.clamped_range(&q) {
                None => prop_assert!(disjoint),
                Some(r) => {
                    prop_assert!(!disjoint);
                    for a in 0..3 {
                        // unclamped floor indices intersected with [0, n-1]
                        let lo = (q.min.axis(a) / 2.5).floor() as i64;
                        let hi = (q.max.axis(a) / 2.5).floor() as i64;
                        prop_assert_eq!(r.lo.axis(a) as i64, lo.clamp(0, 4));
                        prop_assert_eq!(r.hi.axis(a) as i64, hi.clamp(0, 4));
                    }
                }
            }
        }

        #[test]
        fn voxel_index_is_monotone(
            x in 0.0f64..10.0, y in 0.0f64..10.0, z in 0.0f64..10.0, bump in 0.0f64..10.0,
        ) {
            let g = cube_grid(10., 2.5, GridMode::ThreeD);
            let p = Point3::new(x, y, z);
            let v = g.voxel_of_point(&p).unwrap();
            let q = Point3::new((x + bump).min(10.), y, z);
            prop_assert!(g.voxel_of_point(&q).unwrap().i >= v.i);
            let q = Point3::new(x, (y + bump).min(10.), z);
            prop_assert!(g.voxel_of_point(&q).unwrap().j >= v.j);
            let q = Point3::new(x, y, (z + bump).min(10.));
            prop_assert!(g.voxel_of_point(&q).unwrap().k >= v.k);
        }
    }
}
