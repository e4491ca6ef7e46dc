//! Point-cloud ingestion and synthetic generators.

mod las;
mod synthetic;
mod xyz;

use std::fs::File;
use std::path::Path;

pub use las::{encode_las, parse_las, peek_signature, read_las, write_las, LasHeaderInfo};
pub use synthetic::{generate, SyntheticKind, SyntheticSpec};
pub use xyz::{parse_xyz, read_xyz, write_xyz};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Loads a LAS or XYZ file, deciding by signature rather than extension.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    if peek_signature(f) {
        Ok(read_las(path)?.0)
    } else {
        read_xyz(path)
    }
}

/// Writes `.las` files as LAS (millimetre quantization) and anything else as
/// XYZ text.
pub fn write_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_las = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("las"));
    if is_las {
        write_las(cloud, path, [0.001; 3]).map(|_| ())
    } else {
        write_xyz(cloud, path)
    }
}
