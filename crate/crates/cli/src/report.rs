//! Dataset and structure summary as JSON.

use cheesemap::store::DEFAULT_DENSE_CAP;
use cheesemap::{
    global_density, weighted_density, Aabb, BuildOptions, CellSize, Cheesemap, Error, MemoryReport,
    OccupancyStats, PointCloud,
};
use serde::Serialize;

use crate::error::CliResult;
use crate::structure::Structure;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub points: usize,
    pub bounds: Aabb,
    /// `None` when the xy footprint has zero area.
    pub global_density: Option<f64>,
    pub weighted_density: Option<f64>,
    pub density_histogram: Option<Vec<u64>>,
    pub structures: Vec<StructureReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub structure: String,
    pub cell_size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<OccupancyStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemoryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub structures: Vec<Structure>,
    pub cell_sizes: Vec<f64>,
    /// Estimate the weighted density from this many seeded samples.
    pub density_sample: Option<(usize, u64)>,
    pub tau: f64,
    pub dense_cap: u128,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            structures: Vec::new(),
            cell_sizes: vec![1.0],
            density_sample: None,
            tau: cheesemap::store::DEFAULT_TAU,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

pub fn build_report(cfg: &ReportConfig, dataset: &str, cloud: &PointCloud) -> CliResult<DatasetReport> {
    let bounds = cloud.bounding_box()?;
    let (global, weighted) = match global_density(cloud) {
        Ok(g) => (Some(g), Some(weighted_density(cloud, cfg.density_sample)?)),
        Err(Error::DegenerateArea) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let mut structures = Vec::new();
    for st in &cfg.structures {
        let Structure::Cheesemap {
            flavor,
            mode,
            reordered,
        } = *st
        else {
            continue;
        };
        for &s in &cfg.cell_sizes {
            let opts = BuildOptions::new(flavor, mode, CellSize::uniform(s)?)
                .reorder(reordered)
                .tau(cfg.tau)
                .dense_cap(cfg.dense_cap);
            let mut row = StructureReport {
                structure: st.to_string(),
                cell_size: s,
                dims: None,
                occupancy: None,
                memory: None,
                skipped: None,
            };
            match Cheesemap::build(cloud, &opts) {
                Ok(map) => {
                    row.dims = Some(map.grid().dims());
                    row.occupancy = Some(map.occupancy_stats());
                    row.memory = Some(map.memory_report());
                }
                Err(e @ Error::Capacity { .. }) => row.skipped = Some(e.to_string()),
                Err(e) => return Err(e.into()),
            }
            structures.push(row);
        }
    }
    Ok(DatasetReport {
        dataset: dataset.to_string(),
        points: cloud.len(),
        bounds,
        global_density: global,
        density_histogram: weighted.as_ref().map(|w| w.histogram.bins().to_vec()),
        weighted_density: weighted.map(|w| w.value),
        structures,
    })
}
