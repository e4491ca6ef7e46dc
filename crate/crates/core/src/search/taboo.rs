use crate::grid::{IndexRange, VoxelCoord};

/// A run of voxels `(i, j, k_lo..=k_hi)` along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub i: usize,
    pub j: usize,
    pub k_lo: usize,
    pub k_hi: usize,
}

impl Column {
    pub fn voxel_count(&self) -> usize {
        self.k_hi - self.k_lo + 1
    }
}

/// The box of voxels already visited by a k-NN query. Only the two corner
/// coordinates are kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TabooRegion {
    visited: Option<IndexRange>,
}

impl TabooRegion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn visited(&self) -> Option<&IndexRange> {
        self.visited.as_ref()
    }

    /// Grows the region to cover `range` and returns the voxels that were not
    /// covered before, as z columns.
    pub fn advance(&mut self, range: &IndexRange) -> impl Iterator<Item = Column> {
        let prev = self.visited;
        let next = prev.map_or(*range, |p| p.hull(range));
        self.visited = Some(next);
        frontier_columns(prev, next)
    }
}

/// Columns covering `next \ prev`. `next` must contain `prev`.
pub fn frontier_columns(prev: Option<IndexRange>, next: IndexRange) -> impl Iterator<Item = Column> {
    debug_assert!(prev.is_none_or(|p| next.covers(&p)));
    let (lo, hi) = (next.lo, next.hi);
    (lo.i..=hi.i).flat_map(move |i| {
        (lo.j..=hi.j).flat_map(move |j| {
            let segments = match prev {
                Some(p) if (p.lo.i..=p.hi.i).contains(&i) && (p.lo.j..=p.hi.j).contains(&j) => [
                    (lo.k < p.lo.k).then(|| (lo.k, p.lo.k - 1)),
                    (hi.k > p.hi.k).then(|| (p.hi.k + 1, hi.k)),
                ],
                _ => [Some((lo.k, hi.k)), None],
            };
            segments
                .into_iter()
                .flatten()
                .map(move |(k_lo, k_hi)| Column { i, j, k_lo, k_hi })
        })
    })
}

/// Voxels of `next` not in `prev`, each once. `next` is widened to the hull
/// of both first.
pub fn taboo_frontier(prev: Option<IndexRange>, next: IndexRange) -> impl Iterator<Item = VoxelCoord> {
    let next = prev.map_or(next, |p| p.hull(&next));
    frontier_columns(prev, next)
        .flat_map(|c| (c.k_lo..=c.k_hi).map(move |k| VoxelCoord::new(c.i, c.j, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn cube(lo: usize, hi: usize) -> IndexRange {
        IndexRange::new(VoxelCoord::new(lo, lo, lo), VoxelCoord::new(hi, hi, hi))
    }

    #[test]
    fn first_step_yields_everything() {
        assert_eq!(taboo_frontier(None, cube(1, 2)).count(), 8);
    }

    #[test]
    fn unchanged_region_yields_nothing() {
        assert_eq!(taboo_frontier(Some(cube(1, 2)), cube(1, 2)).count(), 0);
    }

    #[test]
    fn shell_matches_set_difference() {
        let got: Vec<VoxelCoord> = taboo_frontier(Some(cube(1, 2)), cube(0, 3)).collect();
        assert_eq!(got.len(), 56);
        let got: HashSet<_> = got.into_iter().collect();
        let expect: HashSet<_> = cube(0, 3).iter().filter(|v| !cube(1, 2).contains(v)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn advance_tracks_hull() {
        let mut t = TabooRegion::new();
        assert_eq!(t.advance(&cube(2, 3)).map(|c| c.voxel_count()).sum::<usize>(), 8);
        // a range partly outside the previous one only adds the difference
        let shifted = IndexRange::new(VoxelCoord::new(3, 2, 2), VoxelCoord::new(4, 3, 3));
        assert_eq!(t.advance(&shifted).map(|c| c.voxel_count()).sum::<usize>(), 4);
        assert_eq!(
            t.visited(),
            Some(&IndexRange::new(VoxelCoord::new(2, 2, 2), VoxelCoord::new(4, 3, 3)))
        );
    }

    fn arb_range() -> impl Strategy<Value = IndexRange> {
        (0usize..6, 0usize..6, 0usize..6, 0usize..4, 0usize..4, 0usize..4).prop_map(
            |(i, j, k, di, dj, dk)| {
                IndexRange::new(VoxelCoord::new(i, j, k), VoxelCoord::new(i + di, j + dj, k + dk))
            },
        )
    }

    proptest! {
        #[test]
        fn frontier_is_exact_difference(a in arb_range(), b in arb_range()) {
            let next = a.hull(&b);
            let got: Vec<VoxelCoord> = taboo_frontier(Some(a), next).collect();
            let unique: HashSet<_> = got.iter().copied().collect();
            prop_assert_eq!(unique.len(), got.len());
            let expect: HashSet<_> = next.iter().filter(|v| !a.contains(v)).collect();
            prop_assert_eq!(unique, expect);
        }
    }
}
