//! The cheesemap itself: a grid plus one of three voxel stores.
//!
//! Every flavor keeps the cloud's handles in a single array grouped by voxel
//! (a counting-sort / CSR layout) and maps voxels to position spans in it:
//!
//! * [`Flavor::Dense`] keeps an offset for every voxel of the grid;
//! * [`Flavor::Sparse`] keeps a hash table holding only non-empty voxels;
//! * [`Flavor::Mixed`] splits the grid into z slices, each dense or sparse
//!   depending on how many of its voxels are occupied.
//!
//! With `reorder` the point coordinates are also permuted into that order, so
//! the points of a voxel sit next to each other in memory.

mod dense;
mod mixed;
mod sparse;
mod stats;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dense::DenseStore;
pub use mixed::{MixedStore, Slice};
pub use sparse::SparseStore;
pub use stats::{CostModel, MemoryReport, OccupancyStats, SliceOccupancy};

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, PointHandle};
use crate::grid::{CellSize, GridMode, GridParams, VoxelCoord};

/// Default densification threshold of mixed slices.
pub const DEFAULT_TAU: f64 = 0.80;
/// Default cap on the number of voxels a dense store may allocate.
pub const DEFAULT_DENSE_CAP: u128 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Dense,
    Sparse,
    Mixed,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::Dense, Flavor::Sparse, Flavor::Mixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Dense => "dense",
            Flavor::Sparse => "sparse",
            Flavor::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Flavor::Dense),
            "sparse" => Ok(Flavor::Sparse),
            "mixed" => Ok(Flavor::Mixed),
            _ => Err(Error::InvalidParameter(format!("unknown flavor '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub flavor: Flavor,
    pub mode: GridMode,
    pub cell: CellSize,
    pub reorder: bool,
    /// Mixed-flavor densification threshold in `(0, 1]`.
    pub tau: f64,
    /// Largest voxel count a dense store may allocate.
    pub dense_cap: u128,
}

impl BuildOptions {
    pub fn new(flavor: Flavor, mode: GridMode, cell: CellSize) -> Self {
        Self {
            flavor,
            mode,
            cell,
            reorder: false,
            tau: DEFAULT_TAU,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn reorder(mut self, on: bool) -> Self {
        self.reorder = on;
        self
    }

    pub fn tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn dense_cap(mut self, cap: u128) -> Self {
        self.dense_cap = cap;
        self
    }
}

/// Half-open range of positions in the grouped handle array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    #[inline]
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone)]
pub enum Store {
    Dense(DenseStore),
    Sparse(SparseStore),
    Mixed(MixedStore),
}

/// A built, immutable index over a point cloud.
#[derive(Debug, Clone)]
pub struct Cheesemap<'a> {
    grid: GridParams,
    /// Original cloud, or the voxel-ordered copy when reordered.
    points: Cow<'a, [Point3]>,
    /// Original handles grouped by voxel.
    order: Vec<PointHandle>,
    store: Store,
    reordered: bool,
    non_empty: usize,
}

impl<'a> Cheesemap<'a> {
    pub fn build(cloud: &'a PointCloud, opts: &BuildOptions) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !(opts.tau > 0.0 && opts.tau <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "densification threshold must lie in (0, 1], got {}",
                opts.tau
            )));
        }
        let grid = GridParams::new(cloud.bounding_box()?, opts.cell, opts.mode)?;
        let total = grid.total_voxels();
        if opts.flavor == Flavor::Dense && total as u128 > opts.dense_cap {
            return Err(Error::Capacity {
                voxels: total as u128,
                cap: opts.dense_cap,
                hint: "use the sparse or mixed flavor, or a larger cell size",
            });
        }

        let (order, store, non_empty) = match opts.flavor {
            Flavor::Dense => build_dense(cloud, &grid),
            Flavor::Sparse => build_sparse(cloud, &grid),
            Flavor::Mixed => build_mixed(cloud, &grid, opts.tau),
        };

        let points = if opts.reorder {
            Cow::Owned(order.iter().map(|&h| *cloud.get(h)).collect())
        } else {
            Cow::Borrowed(cloud.points())
        };

        Ok(Self {
            grid,
            points,
            order,
            store,
            reordered: opts.reorder,
            non_empty,
        })
    }

    pub fn grid(&self) -> &GridParams {
        &self.grid
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn flavor(&self) -> Flavor {
        match self.store {
            Store::Dense(_) => Flavor::Dense,
            Store::Sparse(_) => Flavor::Sparse,
            Store::Mixed(_) => Flavor::Mixed,
        }
    }

    pub fn is_reordered(&self) -> bool {
        self.reordered
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn non_empty_voxels(&self) -> usize {
        self.non_empty
    }

    /// Coordinates of an original handle.
    pub fn point(&self, h: PointHandle) -> Point3 {
        if self.reordered {
            // only used off the hot path
            let pos = self.order.iter().position(|&o| o == h).expect("handle in map");
            self.points[pos]
        } else {
            self.points[h.index()]
        }
    }

    /// Contents of voxel `v`. Dense maps always answer (possibly with an
    /// empty entry); sparse storage answers `None` for empty voxels.
    pub fn voxel_lookup(&self, v: &VoxelCoord) -> Option<VoxelEntry<'_>> {
        self.span_of(v).map(|span| VoxelEntry { map: self, span })
    }

    #[inline]
    pub(crate) fn span_of(&self, v: &VoxelCoord) -> Option<Span> {
        match &self.store {
            Store::Dense(d) => Some(d.get(self.grid.global_index(v))),
            Store::Sparse(s) => s.get(self.grid.global_index(v)),
            Store::Mixed(m) => m.get(v.k, v.i * self.grid.dims()[1] + v.j),
        }
    }

    /// Calls `f` for every point stored in voxels `(i, j, k)` with `k` in
    /// `k_lo..=k_hi`. Dense maps read the whole column run as one span.
    #[inline]
    pub(crate) fn visit_column<F>(&self, i: usize, j: usize, k_lo: usize, k_hi: usize, f: &mut F)
    where
        F: FnMut(PointHandle, &Point3),
    {
        match &self.store {
            Store::Dense(d) => {
                let base = self.grid.global_index(&VoxelCoord::new(i, j, 0));
                self.visit_span(d.run(base + k_lo, base + k_hi), f);
            }
            Store::Sparse(s) => {
                let base = self.grid.global_index(&VoxelCoord::new(i, j, 0));
                for k in k_lo..=k_hi {
                    if let Some(span) = s.get(base + k) {
                        self.visit_span(span, f);
                    }
                }
            }
            Store::Mixed(m) => {
                let local = i * self.grid.dims()[1] + j;
                for k in k_lo..=k_hi {
                    if let Some(span) = m.get(k, local) {
                        self.visit_span(span, f);
                    }
                }
            }
        }
    }

    #[inline]
    fn visit_span<F>(&self, span: Span, f: &mut F)
    where
        F: FnMut(PointHandle, &Point3),
    {
        let handles = &self.order[span.start..span.end];
        if self.reordered {
            for (h, p) in handles.iter().zip(&self.points[span.start..span.end]) {
                f(*h, p);
            }
        } else {
            for h in handles {
                f(*h, &self.points[h.index()]);
            }
        }
    }

    pub fn occupancy_stats(&self) -> OccupancyStats {
        stats::occupancy(self)
    }

    pub fn memory_report(&self) -> MemoryReport {
        stats::memory(self, &CostModel::default())
    }

    /// Fault-injection hook for oracle harnesses: the stored entry of
    /// `victim` is overwritten with `replacement`, so `victim` disappears
    /// from every query.
    #[doc(hidden)]
    pub fn corrupt_handle(&mut self, victim: PointHandle, replacement: PointHandle) -> bool {
        let Some(pos) = self.order.iter().position(|&h| h == victim) else {
            return false;
        };
        let p = self.point(replacement);
        self.order[pos] = replacement;
        if self.reordered {
            self.points.to_mut()[pos] = p;
        }
        true
    }
}

/// The points of one voxel.
#[derive(Clone, Copy)]
pub struct VoxelEntry<'m> {
    map: &'m Cheesemap<'m>,
    span: Span,
}

impl<'m> VoxelEntry<'m> {
    pub fn len(&self) -> usize {
        self.span.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }

    pub fn handles(&self) -> &'m [PointHandle] {
        &self.map.order[self.span.start..self.span.end]
    }

    pub fn points(&self) -> Vec<(PointHandle, Point3)> {
        let mut out = Vec::with_capacity(self.len());
        self.map.visit_span(self.span, &mut |h, p| out.push((h, *p)));
        out
    }
}

impl fmt::Debug for VoxelEntry<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.handles()).finish()
    }
}

fn build_dense(cloud: &PointCloud, grid: &GridParams) -> (Vec<PointHandle>, Store, usize) {
    let keys: Vec<usize> = cloud
        .points()
        .iter()
        .map(|p| grid.global_index(&grid.cell_of(p)))
        .collect();
    let (order, counts) = counting_sort(&keys, grid.total_voxels());
    let non_empty = counts.iter().filter(|&&c| c > 0).count();
    (order, Store::Dense(DenseStore::from_counts(&counts, 0)), non_empty)
}

fn build_sparse(cloud: &PointCloud, grid: &GridParams) -> (Vec<PointHandle>, Store, usize) {
    let keys: Vec<usize> = cloud
        .points()
        .iter()
        .map(|p| grid.global_index(&grid.cell_of(p)))
        .collect();
    let order = sort_by_key(&keys);
    let runs = runs(&order, &keys);
    let mut store = SparseStore::with_capacity(runs.len());
    for (key, span) in &runs {
        store.insert(*key, *span);
    }
    let n = runs.len();
    (order, Store::Sparse(store), n)
}

fn build_mixed(cloud: &PointCloud, grid: &GridParams, tau: f64) -> (Vec<PointHandle>, Store, usize) {
    let footprint = grid.slice_len();
    let nz = grid.dims()[2];
    // slice-major key so each slice is one contiguous block of `order`
    let keys: Vec<usize> = cloud
        .points()
        .iter()
        .map(|p| {
            let v = grid.cell_of(p);
            v.k * footprint + v.i * grid.dims()[1] + v.j
        })
        .collect();
    let order = sort_by_key(&keys);
    let runs = runs(&order, &keys);

    let mut per_slice: Vec<Vec<(usize, Span)>> = vec![Vec::new(); nz];
    for (key, span) in runs {
        per_slice[key / footprint].push((key % footprint, span));
    }

    let mut slices = Vec::with_capacity(nz);
    let mut non_empty = Vec::with_capacity(nz);
    for (k, voxels) in per_slice.into_iter().enumerate() {
        non_empty.push(voxels.len());
        if mixed::densifies(voxels.len(), footprint, tau) {
            let base = voxels.first().map_or(0, |(_, s)| s.start);
            let mut counts = vec![0usize; footprint];
            for (local, span) in &voxels {
                counts[*local] = span.len();
            }
            slices.push(Slice::Dense(DenseStore::from_counts(&counts, base)));
        } else {
            let mut s = SparseStore::with_capacity(voxels.len());
            for (local, span) in voxels {
                s.insert(local, span);
            }
            slices.push(Slice::Sparse(s));
        }
        debug_assert_eq!(slices.len(), k + 1);
    }
    let total_non_empty = non_empty.iter().sum();
    let store = MixedStore {
        slices,
        non_empty,
        footprint,
        tau,
    };
    (order, Store::Mixed(store), total_non_empty)
}

/// Groups handles by key with a counting sort; returns the grouped handles and
/// the per-key counts.
fn counting_sort(keys: &[usize], buckets: usize) -> (Vec<PointHandle>, Vec<usize>) {
    let mut counts = vec![0usize; buckets];
    for &k in keys {
        counts[k] += 1;
    }
    let mut next = Vec::with_capacity(buckets);
    let mut acc = 0;
    for &c in &counts {
        next.push(acc);
        acc += c;
    }
    let mut order = vec![PointHandle(0); keys.len()];
    for (i, &k) in keys.iter().enumerate() {
        order[next[k]] = PointHandle::from(i);
        next[k] += 1;
    }
    (order, counts)
}

/// Stable sort of handles by key.
fn sort_by_key(keys: &[usize]) -> Vec<PointHandle> {
    let mut order: Vec<PointHandle> = (0..keys.len()).map(PointHandle::from).collect();
    order.sort_by_key(|h| keys[h.index()]);
    order
}

/// Maximal runs of equal keys in a key-sorted handle array.
fn runs(order: &[PointHandle], keys: &[usize]) -> Vec<(usize, Span)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let key = keys[order[start].index()];
        let mut end = start + 1;
        while end < order.len() && keys[order[end].index()] == key {
            end += 1;
        }
        out.push((key, Span::new(start, end)));
        start = end;
    }
    out
}
