//! Voxel-grid spatial index for 3D point clouds.
//!
//! A [`Cheesemap`] bins a [`PointCloud`] into a regular grid (2D columns or
//! 3D voxels) and answers fixed-radius kernel queries and k-nearest-neighbor
//! queries by visiting only the voxels that can contain results. Storage comes
//! in three flavors: dense, sparse (hash table of occupied voxels) and mixed
//! (z slices that are individually dense or sparse).
//!
//! ```
//! use cheesemap::{BuildOptions, CellSize, Cheesemap, Flavor, GridMode, Point3, PointCloud, SphereKernel};
//!
//! let cloud = PointCloud::new(vec![
//!     Point3::new(0.0, 0.0, 0.0),
//!     Point3::new(1.0, 1.0, 1.0),
//!     Point3::new(4.0, 4.0, 4.0),
//! ])?;
//! let opts = BuildOptions::new(Flavor::Sparse, GridMode::ThreeD, CellSize::uniform(1.0)?);
//! let map = Cheesemap::build(&cloud, &opts)?;
//!
//! let (hits, _) = map.kernel_search(&SphereKernel::new(Point3::new(0.0, 0.0, 0.0), 2.0)?);
//! assert_eq!(hits.len(), 2);
//! let (nearest, _) = map.knn_search(&Point3::new(3.5, 3.5, 3.5), 1)?;
//! assert_eq!(nearest[0].handle.index(), 2);
//! # Ok::<(), cheesemap::Error>(())
//! ```

pub mod analysis;
pub mod baseline;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod search;
pub mod store;

pub use analysis::{global_density, weighted_density, DensityHistogram, WeightedDensity};
pub use error::{Error, Result};
pub use geometry::{Aabb, BoxKernel, CylinderKernel, Kernel, Point3, PointCloud, PointHandle, SphereKernel};
pub use grid::{CellSize, GridMode, GridParams, IndexRange, VoxelCoord};
pub use search::{CandidateList, Growth, Neighbor, QueryStats};
pub use store::{
    BuildOptions, Cheesemap, Flavor, MemoryReport, OccupancyStats, SliceOccupancy, Store, VoxelEntry,
};
