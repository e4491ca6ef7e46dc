use rustc_hash::FxHashMap;

use super::Span;

/// Only non-empty voxels, in a hash table keyed by voxel index.
#[derive(Debug, Clone, Default)]
pub struct SparseStore {
    table: FxHashMap<usize, Span>,
}

impl SparseStore {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            table: FxHashMap::with_capacity_and_hasher(n, Default::default()),
        }
    }

    pub(crate) fn insert(&mut self, key: usize, span: Span) {
        debug_assert!(!span.is_empty());
        self.table.insert(key, span);
    }

    #[inline]
    pub(crate) fn get(&self, key: usize) -> Option<Span> {
        self.table.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = usize> + '_ {
        self.table.keys().copied()
    }
}
