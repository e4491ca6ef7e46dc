//! Kernel search and k-nearest-neighbor search over a [`Cheesemap`].
//!
//! Both visit only the voxels overlapping the kernel's bounding box. The k-NN
//! search runs a sequence of spherical searches with growing radius: voxels
//! already visited are tracked as one index box (the taboo region), so every
//! voxel and every point is examined at most once per query. The search stops
//! once `k` candidates lie inside the current ball, or the whole grid has been
//! visited.

mod candidates;
mod taboo;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use candidates::CandidateList;
pub use taboo::{frontier_columns, taboo_frontier, Column, TabooRegion};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Kernel, Point3, PointHandle};
use crate::grid::{GridMode, GridParams};
use crate::store::Cheesemap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub handle: PointHandle,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QueryStats {
    pub voxels_visited: usize,
    pub points_tested: usize,
    pub growth_iterations: usize,
    pub final_radius: f64,
}

/// Radius update policy between k-NN iterations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Growth {
    /// Invert the density observed inside the current ball.
    #[default]
    Density,
    /// Always grow by one cell.
    Monotonic,
}

/// Distance from `c` to the nearest face of its own voxel, over the indexed
/// axes.
pub fn initial_radius(c: &Point3, grid: &GridParams) -> f64 {
    let b = grid.voxel_bounds(&grid.cell_of(c));
    (0..grid.mode().indexed_axes())
        .map(|a| {
            let v = c.axis(a);
            (v - b.min.axis(a)).abs().min((v - b.max.axis(a)).abs())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Next k-NN radius.
///
/// With no candidates in the ball the radius grows by `step`. Otherwise the
/// density `ρ = count / (4/3·π·r³)` gives `r' = (k / ρ)^(1/3)`; if `ρ` equals
/// the previous density, or `r'` would not exceed `r`, the radius grows by
/// `step` instead. Returns the new radius and the density it was based on.
pub fn grow_radius(
    count: usize,
    r: f64,
    k: usize,
    step: f64,
    prev_density: Option<f64>,
) -> (f64, Option<f64>) {
    if count == 0 {
        return (r + step, None);
    }
    let density = count as f64 / (4.0 / 3.0 * PI * r * r * r);
    if prev_density == Some(density) {
        return (r + step, Some(density));
    }
    let next = (k as f64 / density).cbrt();
    if next > r && next.is_finite() {
        (next, Some(density))
    } else {
        (r + step, Some(density))
    }
}

impl Cheesemap<'_> {
    /// All points accepted by `kernel`, as original handles.
    pub fn kernel_search<K: Kernel>(&self, kernel: &K) -> (Vec<PointHandle>, QueryStats) {
        let mut out = Vec::new();
        let stats = self.kernel_search_into(kernel, &mut out);
        (out, stats)
    }

    /// Like [`Cheesemap::kernel_search`], appending into `out`.
    pub fn kernel_search_into<K: Kernel>(&self, kernel: &K, out: &mut Vec<PointHandle>) -> QueryStats {
        let mut stats = QueryStats::default();
        let Some(range) = self.grid().clamped_range(&kernel.bounding_box()) else {
            return stats;
        };
        let mut tested = 0;
        let mut visit = |h: PointHandle, p: &Point3| {
            tested += 1;
            if kernel.contains(p) {
                out.push(h);
            }
        };
        for i in range.lo.i..=range.hi.i {
            for j in range.lo.j..=range.hi.j {
                self.visit_column(i, j, range.lo.k, range.hi.k, &mut visit);
            }
        }
        stats.voxels_visited = range.voxel_count();
        stats.points_tested = tested;
        stats
    }

    /// Number of points accepted by `kernel`.
    pub fn kernel_count<K: Kernel>(&self, kernel: &K) -> usize {
        let Some(range) = self.grid().clamped_range(&kernel.bounding_box()) else {
            return 0;
        };
        let mut count = 0;
        let mut visit = |_: PointHandle, p: &Point3| count += kernel.contains(p) as usize;
        for i in range.lo.i..=range.hi.i {
            for j in range.lo.j..=range.hi.j {
                self.visit_column(i, j, range.lo.k, range.hi.k, &mut visit);
            }
        }
        count
    }

    /// The `min(k, N)` points closest to `c`, nearest first.
    pub fn knn_search(&self, c: &Point3, k: usize) -> Result<(Vec<Neighbor>, QueryStats)> {
        self.knn_search_with(c, k, Growth::Density)
    }

    pub fn knn_search_with(
        &self,
        c: &Point3,
        k: usize,
        growth: Growth,
    ) -> Result<(Vec<Neighbor>, QueryStats)> {
        self.knn_traced(c, k, growth, |_| {})
    }

    /// k-NN search reporting every radius it tries to `on_radius`.
    pub(crate) fn knn_traced(
        &self,
        c: &Point3,
        k: usize,
        growth: Growth,
        mut on_radius: impl FnMut(f64),
    ) -> Result<(Vec<Neighbor>, QueryStats)> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let grid = self.grid();
        let step = grid.max_cell();
        let full = grid.full_range();
        let gap = indexed_gap(grid, c);
        let mut r = if gap == 0.0 {
            initial_radius(c, grid)
        } else {
            gap + step
        };

        let mut cand = CandidateList::new(k);
        let mut taboo = TabooRegion::new();
        let mut stats = QueryStats::default();
        let mut prev_density = None;
        loop {
            on_radius(r);
            if let Some(range) = grid.clamped_range(&Aabb::around(c, r)) {
                let mut tested = 0;
                let mut visit = |h: PointHandle, p: &Point3| {
                    tested += 1;
                    cand.insert(h, c.distance_squared(p));
                };
                for col in taboo.advance(&range) {
                    stats.voxels_visited += col.voxel_count();
                    self.visit_column(col.i, col.j, col.k_lo, col.k_hi, &mut visit);
                }
                stats.points_tested += tested;
            }
            let in_ball = cand.count_within(r * r);
            if in_ball >= k || taboo.visited() == Some(&full) {
                break;
            }
            stats.growth_iterations += 1;
            r = match growth {
                Growth::Density => {
                    let (next, density) = grow_radius(in_ball, r, k, step, prev_density);
                    prev_density = density;
                    next
                }
                Growth::Monotonic => r + step,
            };
        }
        stats.final_radius = r;
        let out = cand
            .into_vec()
            .into_iter()
            .map(|(handle, d2)| Neighbor {
                handle,
                distance: d2.sqrt(),
            })
            .collect();
        Ok((out, stats))
    }
}

/// Distance from `c` to the grid box, measured on the indexed axes only.
fn indexed_gap(grid: &GridParams, c: &Point3) -> f64 {
    let b = grid.bounds();
    match grid.mode() {
        GridMode::ThreeD => b.distance_to(c),
        GridMode::TwoD => {
            let flat = Point3::new(c.x, c.y, b.min.z);
            b.distance_to(&flat)
        }
    }
}
