use super::dense::DenseStore;
use super::sparse::SparseStore;
use super::Span;

/// One z slice of a mixed store, keyed by the in-slice index `i·n_y + j`.
#[derive(Debug, Clone)]
pub enum Slice {
    Dense(DenseStore),
    Sparse(SparseStore),
}

#[derive(Debug, Clone)]
pub struct MixedStore {
    pub(crate) slices: Vec<Slice>,
    pub(crate) non_empty: Vec<usize>,
    pub(crate) footprint: usize,
    pub(crate) tau: f64,
}

impl MixedStore {
    #[inline]
    pub(crate) fn get(&self, k: usize, local: usize) -> Option<Span> {
        match &self.slices[k] {
            Slice::Dense(d) => Some(d.get(local)),
            Slice::Sparse(s) => s.get(local),
        }
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn is_dense(&self, k: usize) -> bool {
        matches!(self.slices[k], Slice::Dense(_))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// A slice converts to dense once this many of its `footprint` voxels hold
/// points. Single-pass insertion only ever grows the count, so checking the
/// final count is the same as checking after every insert.
pub(crate) fn densifies(non_empty: usize, footprint: usize, tau: f64) -> bool {
    non_empty as f64 / footprint as f64 >= tau
}
