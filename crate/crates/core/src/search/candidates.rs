use crate::geometry::PointHandle;

/// Bounded buffer of the best `capacity` (handle, distance) pairs, kept sorted
/// by distance.
///
/// The distance can be any monotone key; the k-NN search stores squared
/// distances. Among equal keys the earlier insertion ranks first.
#[derive(Debug, Clone)]
pub struct CandidateList {
    capacity: usize,
    items: Vec<(PointHandle, f64)>,
}

impl CandidateList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "candidate list needs a positive capacity");
        Self {
            capacity,
            items: Vec::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == self.capacity
    }

    /// Largest kept distance, if any.
    pub fn worst(&self) -> Option<f64> {
        self.items.last().map(|e| e.1)
    }

    /// Inserts at the sorted position, dropping the overflow element.
    /// Returns `false` when the list is full and `d` is no better than the
    /// current worst.
    #[inline]
    pub fn insert(&mut self, h: PointHandle, d: f64) -> bool {
        if self.is_full() && d >= self.items[self.capacity - 1].1 {
            return false;
        }
        // new points of a growing search usually land near the tail
        let at = self.items.partition_point(|e| e.1 <= d);
        self.items.insert(at, (h, d));
        self.items.truncate(self.capacity);
        true
    }

    /// Number of kept entries with distance `<= limit`.
    #[inline]
    pub fn count_within(&self, limit: f64) -> usize {
        self.items.partition_point(|e| e.1 <= limit)
    }

    pub fn as_slice(&self) -> &[(PointHandle, f64)] {
        &self.items
    }

    pub fn into_vec(self) -> Vec<(PointHandle, f64)> {
        self.items
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn distances(l: &CandidateList) -> Vec<f64> {
        l.as_slice().iter().map(|e| e.1).collect()
    }

    #[test]
    fn insert_and_reject() {
        let mut l = CandidateList::new(3);
        for (i, d) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            assert!(l.insert(PointHandle::from(i), d));
        }
        assert!(l.insert(PointHandle(9), 2.5));
        assert_eq!(distances(&l), vec![1.0, 2.0, 2.5]);
        assert!(!l.insert(PointHandle(10), 5.0));
        assert_eq!(distances(&l), vec![1.0, 2.0, 2.5]);
        assert_eq!(l.count_within(2.0), 2);
        assert_eq!(l.worst(), Some(2.5));
    }

    #[test]
    fn ties_keep_earlier_insertions() {
        let mut l = CandidateList::new(2);
        l.insert(PointHandle(1), 1.0);
        l.insert(PointHandle(2), 1.0);
        assert!(!l.insert(PointHandle(3), 1.0));
        let ids: Vec<u64> = l.as_slice().iter().map(|e| e.0 .0).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn keeps_smallest_of_random_stream() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut l = CandidateList::new(50);
        let mut all = Vec::new();
        for i in 0..10_000 {
            let d: f64 = rng.random_range(0.0..1000.0);
            all.push(d);
            l.insert(PointHandle::from(i), d);
        }
        all.sort_by(f64::total_cmp);
        assert_eq!(distances(&l), all[..50].to_vec());
        assert!(distances(&l).windows(2).all(|w| w[0] <= w[1]));
    }
}
