//! Occupancy counters and analytic memory accounting.

use serde::Serialize;

use super::{Cheesemap, Slice, Store};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceOccupancy {
    pub k: usize,
    pub non_empty: usize,
    pub footprint: usize,
    pub dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyStats {
    /// Voxels of the full grid, whatever the flavor stores.
    pub total_voxels: usize,
    pub non_empty: usize,
    pub empty_fraction: f64,
    /// Mixed flavor only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<Vec<SliceOccupancy>>,
}

/// Byte costs used by [`MemoryReport`]. These are declared constants, not
/// measurements of the allocator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    /// One stored point handle (a 64-bit index).
    pub handle: usize,
    /// One dense offset-table entry.
    pub dense_slot: usize,
    /// One hash-table entry: 8-byte key, 16-byte span, 8 bytes of bucket
    /// overhead.
    pub sparse_entry: usize,
    /// Per-slice tag of a mixed store.
    pub slice_header: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            handle: 8,
            dense_slot: 8,
            sparse_entry: 32,
            slice_header: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryReport {
    pub handle_bytes: usize,
    pub structure_bytes: usize,
    pub total_bytes: usize,
    pub model: CostModel,
}

pub(super) fn occupancy(map: &Cheesemap<'_>) -> OccupancyStats {
    let total = map.grid.total_voxels();
    let slices = match &map.store {
        Store::Mixed(m) => Some(
            m.slices
                .iter()
                .zip(&m.non_empty)
                .enumerate()
                .map(|(k, (s, &n))| SliceOccupancy {
                    k,
                    non_empty: n,
                    footprint: m.footprint,
                    dense: matches!(s, Slice::Dense(_)),
                })
                .collect(),
        ),
        _ => None,
    };
    OccupancyStats {
        total_voxels: total,
        non_empty: map.non_empty,
        empty_fraction: (total - map.non_empty) as f64 / total as f64,
        slices,
    }
}

pub(super) fn memory(map: &Cheesemap<'_>, model: &CostModel) -> MemoryReport {
    let handle_bytes = model.handle * map.len();
    let structure_bytes = match &map.store {
        Store::Dense(d) => model.dense_slot * (d.slots() + 1),
        Store::Sparse(s) => model.sparse_entry * s.len(),
        Store::Mixed(m) => m
            .slices
            .iter()
            .map(|s| {
                model.slice_header
                    + match s {
                        Slice::Dense(d) => model.dense_slot * (d.slots() + 1),
                        Slice::Sparse(s) => model.sparse_entry * s.len(),
                    }
            })
            .sum(),
    };
    MemoryReport {
        handle_bytes,
        structure_bytes,
        total_bytes: handle_bytes + structure_bytes,
        model: *model,
    }
}
