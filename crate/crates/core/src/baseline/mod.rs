//! Reference implementations: linear scans and a plain k-d tree.

mod brute;
mod kdtree;

pub use brute::{brute_knn, brute_radius};
pub use kdtree::{KdNode, KdTree, DEFAULT_LEAF_SIZE};
