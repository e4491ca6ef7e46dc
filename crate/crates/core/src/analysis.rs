//! Dataset density metrics.
//!
//! The local density of a point is the number of points (itself included)
//! within 1 m in the xy plane, divided by the disc area π. Local densities are
//! floored into a 256-bin integer histogram, with everything ≥ 255 in the last
//! bin, and the weighted density is the histogram mean.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CylinderKernel, PointCloud};
use crate::grid::{CellSize, GridMode};
use crate::store::{BuildOptions, Cheesemap, Flavor};

pub const DENSITY_BINS: usize = 256;
/// Radius of the xy neighbourhood used for local densities, in meters.
pub const LOCAL_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityHistogram {
    bins: Vec<u64>,
}

impl Default for DensityHistogram {
    fn default() -> Self {
        Self {
            bins: vec![0; DENSITY_BINS],
        }
    }
}

impl DensityHistogram {
    /// Bin of a local density: floor, clamped to the last bin.
    pub fn bin_of(density: f64) -> usize {
        (density.floor().max(0.0) as usize).min(DENSITY_BINS - 1)
    }

    pub fn add(&mut self, density: f64) {
        self.bins[Self::bin_of(density)] += 1;
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Frequency-weighted mean of the bin values.
    pub fn weighted_mean(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let sum: u64 = self
            .bins
            .iter()
            .enumerate()
            .map(|(b, &f)| b as u64 * f)
            .sum();
        sum as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedDensity {
    pub value: f64,
    pub histogram: DensityHistogram,
}

/// Points per square meter of the xy bounding box.
pub fn global_density(cloud: &PointCloud) -> Result<f64> {
    let b = cloud.bounding_box()?;
    let area = (b.max.x - b.min.x) * (b.max.y - b.min.y);
    if area.is_nan() || area <= 0.0 {
        return Err(Error::DegenerateArea);
    }
    Ok(cloud.len() as f64 / area)
}

/// Histogram-weighted local density. `sample = Some((n, seed))` evaluates
/// only `n` points drawn without replacement; neighbours are always counted
/// over the whole cloud.
pub fn weighted_density(cloud: &PointCloud, sample: Option<(usize, u64)>) -> Result<WeightedDensity> {
    let opts = BuildOptions::new(Flavor::Mixed, GridMode::TwoD, CellSize::uniform(LOCAL_RADIUS)?);
    let map = Cheesemap::build(cloud, &opts)?;

    let subjects: Vec<usize> = match sample {
        Some((n, seed)) if n < cloud.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, cloud.len(), n).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..cloud.len()).collect(),
    };

    let area = PI * LOCAL_RADIUS * LOCAL_RADIUS;
    let bins: Vec<usize> = subjects
        .par_iter()
        .map(|&i| {
            let p = cloud.points()[i];
            let kernel = CylinderKernel::new((p.x, p.y), LOCAL_RADIUS, None).expect("positive radius");
            DensityHistogram::bin_of(map.kernel_count(&kernel) as f64 / area)
        })
        .collect();

    let mut histogram = DensityHistogram::default();
    for b in bins {
        histogram.bins[b] += 1;
    }
    Ok(WeightedDensity {
        value: histogram.weighted_mean(),
        histogram,
    })
}
