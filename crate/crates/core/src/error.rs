use std::path::PathBuf;

/// Errors produced while building, querying or loading point clouds.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({x}, {y}, {z}) lies outside the grid bounding box")]
    OutOfDomain { x: f64, y: f64, z: f64 },

    #[error("grid of {voxels} voxels exceeds capacity {cap}: {hint}")]
    Capacity {
        voxels: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("zero-area bounding box; density is undefined")]
    DegenerateArea,

    #[error("LAS parse error at byte {offset}: {reason}")]
    Las { offset: u64, reason: String },

    #[error("{path}:{line}: {reason}")]
    Xyz {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn las(offset: u64, reason: impl Into<String>) -> Self {
        Error::Las {
            offset,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
