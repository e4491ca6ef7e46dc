use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Kernel, Point3, PointCloud, PointHandle};
use crate::search::Neighbor;

pub const DEFAULT_LEAF_SIZE: usize = 16;

/// Node of a median-split k-d tree. Points with coordinate `<= value` on
/// `axis` go left, the rest right.
#[derive(Debug, Clone)]
pub enum KdNode {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    nodes: Vec<KdNode>,
    handles: Vec<PointHandle>,
    leaf_size: usize,
}

impl<'a> KdTree<'a> {
    pub fn build(cloud: &'a PointCloud) -> Result<Self> {
        Self::with_leaf_size(cloud, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(cloud: &'a PointCloud, leaf_size: usize) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if leaf_size == 0 {
            return Err(Error::InvalidParameter("leaf size must be positive".into()));
        }
        let mut tree = Self {
            cloud,
            nodes: Vec::new(),
            handles: (0..cloud.len()).map(PointHandle::from).collect(),
            leaf_size,
        };
        tree.split(0, cloud.len());
        Ok(tree)
    }

    pub fn nodes(&self) -> &[KdNode] {
        &self.nodes
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    /// Builds the subtree over `handles[start..end]`, returning its node id.
    fn split(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= self.leaf_size {
            return id;
        }
        let pts: Vec<Point3> = self.handles[start..end]
            .iter()
            .map(|&h| *self.cloud.get(h))
            .collect();
        let bounds = Aabb::from_points(&pts).expect("non-empty range");
        let ext = bounds.extent();
        let axis = (0..3)
            .max_by(|&a, &b| ext.axis(a).total_cmp(&ext.axis(b)))
            .unwrap();
        if ext.axis(axis) == 0.0 {
            // all points coincide
            return id;
        }

        let cloud = self.cloud;
        let coord = |h: &PointHandle| cloud.get(*h).axis(axis);
        let slice = &mut self.handles[start..end];
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| coord(a).total_cmp(&coord(b)));
        let mut value = coord(&slice[mid]);
        if value >= bounds.max.axis(axis) {
            // median equals the maximum: split just below it instead
            value = slice
                .iter()
                .map(coord)
                .filter(|&v| v < value)
                .fold(f64::NEG_INFINITY, f64::max);
        }
        // partition: `<= value` first
        let mut left_len = 0;
        for i in 0..slice.len() {
            if coord(&slice[i]) <= value {
                slice.swap(i, left_len);
                left_len += 1;
            }
        }
        let left = self.split(start, start + left_len);
        let right = self.split(start + left_len, end);
        self.nodes[id] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn radius_search<K: Kernel>(&self, kernel: &K) -> Vec<PointHandle> {
        let mut out = Vec::new();
        let bounds = kernel.bounding_box();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                KdNode::Leaf { start, end } => {
                    out.extend(
                        self.handles[start..end]
                            .iter()
                            .filter(|&&h| kernel.contains(self.cloud.get(h))),
                    );
                }
                KdNode::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    if bounds.min.axis(axis) <= value {
                        stack.push(left);
                    }
                    if bounds.max.axis(axis) > value {
                        stack.push(right);
                    }
                }
            }
        }
        out
    }

    /// The `min(k, N)` nearest points, nearest first.
    pub fn knn(&self, c: &Point3, k: usize) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        self.knn_node(0, c, k, &mut heap);
        let mut out: Vec<Neighbor> = heap
            .into_iter()
            .map(|e| Neighbor {
                handle: e.handle,
                distance: e.d2.sqrt(),
            })
            .collect();
        out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.handle.cmp(&b.handle)));
        out
    }

    fn knn_node(&self, id: usize, c: &Point3, k: usize, heap: &mut BinaryHeap<HeapEntry>) {
        match self.nodes[id] {
            KdNode::Leaf { start, end } => {
                for &h in &self.handles[start..end] {
                    let d2 = c.distance_squared(self.cloud.get(h));
                    if heap.len() < k {
                        heap.push(HeapEntry { d2, handle: h });
                    } else if d2 < heap.peek().unwrap().d2 {
                        heap.pop();
                        heap.push(HeapEntry { d2, handle: h });
                    }
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = c.axis(axis) - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_node(near, c, k, heap);
                if heap.len() < k || diff * diff < heap.peek().unwrap().d2 {
                    self.knn_node(far, c, k, heap);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    d2: f64,
    handle: PointHandle,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.handle.cmp(&other.handle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{brute_knn, brute_radius};
    use crate::geometry::{BoxKernel, CylinderKernel, SphereKernel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| {
                    // coarse coordinates force plenty of duplicates
                    Point3::new(
                        (rng.random_range(0.0..40.0f64) * 4.0).round() / 4.0,
                        (rng.random_range(0.0..40.0f64) * 4.0).round() / 4.0,
                        (rng.random_range(0.0..8.0f64) * 4.0).round() / 4.0,
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn sorted(mut v: Vec<PointHandle>) -> Vec<PointHandle> {
        v.sort();
        v
    }

    #[test]
    fn empty_cloud_is_error() {
        assert!(matches!(KdTree::build(&PointCloud::default()), Err(Error::EmptyCloud)));
    }

    #[test]
    fn collinear_two_nearest() {
        let cloud = PointCloud::new(vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(5., 0., 0.),
        ])
        .unwrap();
        let t = KdTree::with_leaf_size(&cloud, 1).unwrap();
        let got = t.knn(&Point3::new(0.4, 0., 0.), 2);
        assert_eq!(got[0].handle, PointHandle(0));
        assert_eq!(got[1].handle, PointHandle(1));
        assert!((got[0].distance - 0.4).abs() < 1e-12);
        assert!((got[1].distance - 0.6).abs() < 1e-12);
    }

    #[test]
    fn split_invariants_hold() {
        let cloud = random_cloud(3000, 8);
        let t = KdTree::with_leaf_size(&cloud, 4).unwrap();
        let mut seen = vec![0u8; cloud.len()];
        fn walk(t: &KdTree, id: usize, lim: &mut Vec<(usize, f64, bool)>, seen: &mut [u8]) {
            match t.nodes[id] {
                KdNode::Leaf { start, end } => {
                    for &h in &t.handles[start..end] {
                        seen[h.index()] += 1;
                        let p = t.cloud.get(h);
                        for &(axis, value, is_left) in lim.iter() {
                            if is_left {
                                assert!(p.axis(axis) <= value);
                            } else {
                                assert!(p.axis(axis) > value);
                            }
                        }
                    }
                }
                KdNode::Split { axis, value, left, right } => {
                    lim.push((axis, value, true));
                    walk(t, left, lim, seen);
                    lim.pop();
                    lim.push((axis, value, false));
                    walk(t, right, lim, seen);
                    lim.pop();
                }
            }
        }
        walk(&t, 0, &mut Vec::new(), &mut seen);
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn agrees_with_brute_force() {
        let cloud = random_cloud(5000, 9);
        let t = KdTree::build(&cloud).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let c = Point3::new(
                rng.random_range(-5.0..45.0),
                rng.random_range(-5.0..45.0),
                rng.random_range(-2.0..10.0),
            );
            let r = rng.random_range(0.25..6.0);
            let s = SphereKernel::new(c, r).unwrap();
            assert_eq!(sorted(t.radius_search(&s)), brute_radius(&cloud, &s));
            let b = BoxKernel::cube(c, r).unwrap();
            assert_eq!(sorted(t.radius_search(&b)), brute_radius(&cloud, &b));
            let cyl = CylinderKernel::new((c.x, c.y), r, None).unwrap();
            assert_eq!(sorted(t.radius_search(&cyl)), brute_radius(&cloud, &cyl));

            let k = rng.random_range(1..60);
            let got: Vec<f64> = t.knn(&c, k).iter().map(|n| n.distance).collect();
            let expect: Vec<f64> = brute_knn(&cloud, &c, k).iter().map(|n| n.distance).collect();
            assert_eq!(got, expect);
        }
    }
}
