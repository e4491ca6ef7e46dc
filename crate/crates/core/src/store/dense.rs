use super::Span;

/// Every voxel materialised: an offset table over the grouped handle array.
/// Voxel `g` owns positions `offsets[g]..offsets[g + 1]`.
#[derive(Debug, Clone)]
pub struct DenseStore {
    offsets: Vec<usize>,
}

impl DenseStore {
    /// Builds the offset table from per-voxel point counts, starting at `base`.
    pub(crate) fn from_counts(counts: &[usize], base: usize) -> Self {
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        let mut acc = base;
        offsets.push(acc);
        for &c in counts {
            acc += c;
            offsets.push(acc);
        }
        Self { offsets }
    }

    pub fn slots(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub(crate) fn get(&self, slot: usize) -> Span {
        Span::new(self.offsets[slot], self.offsets[slot + 1])
    }

    /// Positions of consecutive slots `first..=last` as one span.
    #[inline]
    pub(crate) fn run(&self, first: usize, last: usize) -> Span {
        Span::new(self.offsets[first], self.offsets[last + 1])
    }
}
