//! Oracle harness: every flavor × mode × cell size × query kind against brute
//! force on the same seeded query centers.

use std::fmt;

use cheesemap::baseline::{brute_knn, brute_radius};
use cheesemap::{
    BoxKernel, BuildOptions, CellSize, Cheesemap, CylinderKernel, Error, Flavor, GridMode, Kernel, Neighbor, Point3,
    PointCloud, PointHandle, SphereKernel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{QueryCenters, QueryKind, DEFAULT_KS, DEFAULT_RADII};
use crate::error::{CliError, CliResult};
use crate::structure::Structure;

pub const DEFAULT_VERIFY_CELLS: [f64; 4] = [0.5, 1.0, 2.5, 5.0];
pub const DEFAULT_MAX_POINTS: usize = 200_000;
/// Relative tolerance on k-NN distances.
pub const KNN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub cell_sizes: Vec<f64>,
    pub radii: Vec<f64>,
    pub ks: Vec<usize>,
    pub queries: usize,
    pub seed: u64,
    pub max_points: usize,
    pub tau: f64,
    /// Corrupt every map before querying (test hook).
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            cell_sizes: DEFAULT_VERIFY_CELLS.to_vec(),
            radii: DEFAULT_RADII.to_vec(),
            ks: DEFAULT_KS.to_vec(),
            queries: 20,
            seed: 0,
            max_points: DEFAULT_MAX_POINTS,
            tau: cheesemap::store::DEFAULT_TAU,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub structure: String,
    pub cell_size: f64,
    pub query: QueryKind,
    pub param: f64,
    pub center: Point3,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MISMATCH {} s={} {} param={} center=({}, {}, {}): {}",
            self.structure, self.cell_size, self.query, self.param, self.center.x, self.center.y, self.center.z, self.detail
        )
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: usize,
    pub mismatches: Vec<Mismatch>,
    pub skipped: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Seeded subsample without replacement, in original order.
pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> CliResult<PointCloud> {
    if n >= cloud.len() {
        return Ok(cloud.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, cloud.len(), n).into_vec();
    idx.sort_unstable();
    Ok(PointCloud::new(idx.into_iter().map(|i| cloud.points()[i]).collect())?)
}

struct Expected {
    center: Point3,
    /// Per kernel kind, per radius: sorted handles.
    kernels: Vec<Vec<Vec<PointHandle>>>,
    /// Per k.
    knn: Vec<Vec<Neighbor>>,
}

fn kernel_for(kind: QueryKind, c: Point3, r: f64) -> CliResult<Box<dyn Kernel>> {
    Ok(match kind {
        QueryKind::Sphere => Box::new(SphereKernel::new(c, r)?),
        QueryKind::Cube => Box::new(BoxKernel::cube(c, r)?),
        QueryKind::Cylinder => Box::new(CylinderKernel::new((c.x, c.y), r, None)?),
        QueryKind::Knn => unreachable!(),
    })
}

fn diff(got: &[PointHandle], expect: &[PointHandle]) -> String {
    let missing: Vec<u64> = expect
        .iter()
        .filter(|h| got.binary_search(h).is_err())
        .map(|h| h.0)
        .collect();
    let extra: Vec<u64> = got
        .iter()
        .filter(|h| expect.binary_search(h).is_err())
        .map(|h| h.0)
        .collect();
    let dup = got.windows(2).filter(|w| w[0] == w[1]).count();
    format!(
        "{} results vs {} expected; missing {:?}; extra {:?}; duplicates {}",
        got.len(),
        expect.len(),
        &missing[..missing.len().min(8)],
        &extra[..extra.len().min(8)],
        dup
    )
}

pub fn run_verify(cfg: &VerifyConfig, cloud: &PointCloud, mut on_line: impl FnMut(&str)) -> CliResult<VerifyReport> {
    if cloud.len() > cfg.max_points {
        return Err(CliError::Usage(format!(
            "cloud has {} points, above the verification cap of {}; pass --subsample {} or raise --max-points",
            cloud.len(),
            cfg.max_points,
            cfg.max_points
        )));
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud.into());
    }
    if cfg.queries == 0 || cfg.ks.contains(&0) {
        return Err(CliError::Usage("--queries and k values must be positive".into()));
    }

    let mut centers = QueryCenters::new(cloud, cfg.seed);
    let handles: Vec<PointHandle> = (0..cfg.queries).map(|_| centers.next_handle()).collect();
    let mut expected = Vec::with_capacity(handles.len());
    for &h in &handles {
        let c = *cloud.get(h);
        let mut kernels = Vec::new();
        for kind in QueryKind::KERNELS {
            let per_r = cfg
                .radii
                .iter()
                .map(|&r| Ok(brute_radius(cloud, &kernel_for(kind, c, r)?.as_ref())))
                .collect::<CliResult<Vec<_>>>()?;
            kernels.push(per_r);
        }
        let knn = cfg.ks.iter().map(|&k| brute_knn(cloud, &c, k)).collect();
        expected.push(Expected {
            center: c,
            kernels,
            knn,
        });
    }

    let mut report = VerifyReport::default();
    for mode in [GridMode::TwoD, GridMode::ThreeD] {
        for flavor in Flavor::ALL {
            let structure = Structure::Cheesemap {
                flavor,
                mode,
                reordered: false,
            };
            for &s in &cfg.cell_sizes {
                let opts = BuildOptions::new(flavor, mode, CellSize::uniform(s)?).tau(cfg.tau);
                let mut map = match Cheesemap::build(cloud, &opts) {
                    Ok(m) => m,
                    Err(e @ Error::Capacity { .. }) => {
                        let line = format!("SKIP {structure} s={s}: {e}");
                        on_line(&line);
                        report.skipped.push(line);
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                if cfg.inject_fault {
                    let victim = handles[0];
                    let replacement = PointHandle((victim.0 + 1) % cloud.len() as u64);
                    if victim == replacement || !map.corrupt_handle(victim, replacement) {
                        return Err(CliError::Usage("fault injection needs at least two points".into()));
                    }
                }
                let before = report.mismatches.len();
                check_map(&map, structure, s, cfg, &expected, &mut report);
                for m in &report.mismatches[before..] {
                    on_line(&m.to_string());
                }
                on_line(&format!(
                    "{} {structure} s={s}",
                    if report.mismatches.len() == before { "ok" } else { "FAIL" }
                ));
            }
        }
    }
    Ok(report)
}

fn check_map(
    map: &Cheesemap<'_>,
    structure: Structure,
    s: f64,
    cfg: &VerifyConfig,
    expected: &[Expected],
    report: &mut VerifyReport,
) {
    let fail = |query, param, center, detail| Mismatch {
        structure: structure.to_string(),
        cell_size: s,
        query,
        param,
        center,
        detail,
    };
    for e in expected {
        for (ki, kind) in QueryKind::KERNELS.into_iter().enumerate() {
            for (ri, &r) in cfg.radii.iter().enumerate() {
                let kernel = kernel_for(kind, e.center, r).expect("validated radius");
                let (mut got, _) = map.kernel_search(&kernel.as_ref());
                got.sort_unstable();
                report.checks += 1;
                let want = &e.kernels[ki][ri];
                if &got != want {
                    report.mismatches.push(fail(kind, r, e.center, diff(&got, want)));
                }
            }
        }
        for (i, &k) in cfg.ks.iter().enumerate() {
            let (got, _) = map.knn_search(&e.center, k).expect("k validated");
            report.checks += 1;
            let want = &e.knn[i];
            let bad = got.len() != want.len()
                || got.iter().zip(want).any(|(g, w)| {
                    (g.distance - w.distance).abs() > KNN_TOLERANCE * w.distance.max(f64::MIN_POSITIVE)
                });
            if bad {
                let first = got
                    .iter()
                    .zip(want)
                    .position(|(g, w)| g.distance != w.distance)
                    .unwrap_or(got.len().min(want.len()));
                let detail = format!(
                    "{} neighbors vs {} expected; first difference at rank {first}",
                    got.len(),
                    want.len()
                );
                report.mismatches.push(fail(QueryKind::Knn, k as f64, e.center, detail));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cheesemap::io::{generate, SyntheticSpec};

    fn small() -> VerifyConfig {
        VerifyConfig {
            queries: 4,
            radii: vec![1.0, 5.0],
            ks: vec![5, 20],
            cell_sizes: vec![1.0, 2.5],
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn clean_cloud_passes() {
        let cloud = generate(&SyntheticSpec::lake(3000, 1)).unwrap();
        let report = run_verify(&small(), &cloud, |_| {}).unwrap();
        assert!(report.passed());
        // 6 maps × 4 queries × (3 kernels × 2 radii + 2 k)
        assert_eq!(report.checks, 6 * 2 * 4 * 8);
    }

    #[test]
    fn injected_fault_is_caught() {
        let cloud = generate(&SyntheticSpec::lake(3000, 1)).unwrap();
        let cfg = VerifyConfig {
            inject_fault: true,
            ..small()
        };
        let report = run_verify(&cfg, &cloud, |_| {}).unwrap();
        assert!(!report.passed());
        assert!(report.mismatches[0].to_string().contains("MISMATCH"));
    }

    #[test]
    fn cap_is_enforced() {
        let cloud = generate(&SyntheticSpec::lake(300, 1)).unwrap();
        let cfg = VerifyConfig {
            max_points: 100,
            ..small()
        };
        let err = run_verify(&cfg, &cloud, |_| {}).unwrap_err();
        assert!(err.to_string().contains("--subsample"));
        let sub = subsample(&cloud, 100, 3).unwrap();
        assert_eq!(sub.len(), 100);
        assert!(run_verify(&cfg, &sub, |_| {}).unwrap().passed());
    }
}
