//! Timed query sweeps.
//!
//! For every structure, cell size and query parameter the index is built once
//! and queried with centers drawn (with replacement) from the cloud by a
//! seeded ChaCha8 stream. Two passes run per combination:
//!
//! * an untimed pass over the first `counter_queries` centers fills the
//!   result-size and voxel counters, so they do not depend on machine speed;
//! * a timed pass runs `warmup` queries, then times single queries with a
//!   monotonic clock until the budget is spent.

use std::collections::HashMap;
use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use cheesemap::baseline::{brute_knn, brute_radius, KdTree};
use cheesemap::store::DEFAULT_DENSE_CAP;
use cheesemap::{
    BoxKernel, BuildOptions, CellSize, Cheesemap, CylinderKernel, Error, Point3, PointCloud, PointHandle,
    SphereKernel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::input::Input;
use crate::structure::Structure;

pub const DEFAULT_CELL_SIZES: [f64; 5] = [1.0, 2.5, 5.0, 7.5, 10.0];
pub const DEFAULT_RADII: [f64; 7] = [0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0];
pub const DEFAULT_KS: [usize; 6] = [5, 10, 20, 30, 40, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Sphere,
    Cube,
    Cylinder,
    Knn,
}

impl QueryKind {
    pub const KERNELS: [QueryKind; 3] = [QueryKind::Sphere, QueryKind::Cube, QueryKind::Cylinder];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Sphere => "sphere",
            QueryKind::Cube => "cube",
            QueryKind::Cylinder => "cylinder",
            QueryKind::Knn => "knn",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "sphere" => Ok(QueryKind::Sphere),
            "cube" => Ok(QueryKind::Cube),
            "cylinder" => Ok(QueryKind::Cylinder),
            "knn" => Ok(QueryKind::Knn),
            _ => Err(CliError::Usage(format!("unknown query type '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub input: Input,
    pub structures: Vec<Structure>,
    pub cell_sizes: Vec<f64>,
    pub query: QueryKind,
    pub radii: Vec<f64>,
    pub ks: Vec<usize>,
    /// Time budget per combination, in seconds.
    pub seconds: f64,
    pub warmup: usize,
    pub seed: u64,
    /// Parallel query workers; 1 measures latency, more measure throughput.
    pub threads: usize,
    /// Untimed queries behind the counter columns.
    pub counter_queries: usize,
    /// Build every cheesemap structure with point reordering.
    pub reorder: bool,
    pub tau: f64,
    pub dense_cap: u128,
}

impl BenchConfig {
    pub fn new(input: Input, structures: Vec<Structure>, query: QueryKind) -> Self {
        Self {
            input,
            structures,
            cell_sizes: DEFAULT_CELL_SIZES.to_vec(),
            query,
            radii: DEFAULT_RADII.to_vec(),
            ks: DEFAULT_KS.to_vec(),
            seconds: 1.0,
            warmup: 10,
            seed: 0,
            threads: 1,
            counter_queries: 100,
            reorder: false,
            tau: cheesemap::store::DEFAULT_TAU,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Usage(m.into()));
        if self.structures.is_empty() {
            return bad("at least one structure is required");
        }
        if self.params().is_empty() {
            return bad("at least one radius or k value is required");
        }
        if !(self.seconds > 0.0 && self.seconds.is_finite()) {
            return bad("--seconds must be positive");
        }
        if self.threads == 0 || self.counter_queries == 0 {
            return bad("--threads and --counter-queries must be positive");
        }
        if self.query == QueryKind::Knn && self.ks.contains(&0) {
            return bad("k values must be positive");
        }
        if self.query != QueryKind::Knn && self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("radii must be positive");
        }
        if self.needs_cells() && self.cell_sizes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("cell sizes must be positive");
        }
        if self.needs_cells() && self.cell_sizes.is_empty() {
            return bad("at least one cell size is required");
        }
        Ok(())
    }

    /// Radii, or k values for k-NN sweeps.
    pub fn params(&self) -> Vec<f64> {
        match self.query {
            QueryKind::Knn => self.ks.iter().map(|&k| k as f64).collect(),
            _ => self.radii.clone(),
        }
    }

    fn needs_cells(&self) -> bool {
        self.structures
            .iter()
            .any(|s| matches!(s, Structure::Cheesemap { .. }))
    }

    /// Rows a run emits, skipped ones included.
    pub fn expected_rows(&self) -> usize {
        let per_param = self
            .structures
            .iter()
            .map(|s| match s {
                Structure::Cheesemap { .. } => self.cell_sizes.len(),
                _ => 1,
            })
            .sum::<usize>();
        per_param * self.params().len()
    }
}

/// One CSV row. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub dataset: String,
    pub structure: String,
    pub flavor: Option<String>,
    pub dims: Option<u8>,
    pub cell_size: Option<f64>,
    pub reordered: bool,
    pub query: String,
    /// Radius in meters, or k.
    pub param: f64,
    pub queries: u64,
    pub mean_ns: Option<f64>,
    pub median_ns: Option<u64>,
    pub p95_ns: Option<u64>,
    pub mean_voxels: Option<f64>,
    pub mean_results: Option<f64>,
    /// `ok` or `skipped`.
    pub status: String,
    pub note: String,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "dataset",
    "structure",
    "flavor",
    "dims",
    "cell_size",
    "reordered",
    "query",
    "param",
    "queries",
    "mean_ns",
    "median_ns",
    "p95_ns",
    "mean_voxels",
    "mean_results",
    "status",
    "note",
];

impl BenchRecord {
    fn blank(dataset: &str, s: Structure, cell: Option<f64>, query: QueryKind, param: f64) -> Self {
        Self {
            dataset: dataset.to_string(),
            structure: s.to_string(),
            flavor: s.flavor().map(|f| f.to_string()),
            dims: s.dims(),
            cell_size: cell,
            reordered: s.reordered(),
            query: query.to_string(),
            param,
            queries: 0,
            mean_ns: None,
            median_ns: None,
            p95_ns: None,
            mean_voxels: None,
            mean_results: None,
            status: "ok".into(),
            note: String::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Seeded stream of query centers drawn from the cloud.
pub struct QueryCenters<'a> {
    cloud: &'a PointCloud,
    rng: ChaCha8Rng,
}

impl<'a> QueryCenters<'a> {
    pub fn new(cloud: &'a PointCloud, seed: u64) -> Self {
        Self {
            cloud,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl QueryCenters<'_> {
    pub fn next_handle(&mut self) -> PointHandle {
        PointHandle::from(self.rng.random_range(0..self.cloud.len()))
    }
}

impl Iterator for QueryCenters<'_> {
    type Item = Point3;

    fn next(&mut self) -> Option<Point3> {
        let h = self.next_handle();
        Some(*self.cloud.get(h))
    }
}

/// A built structure ready to answer queries.
pub enum Index<'a> {
    Map(Cheesemap<'a>),
    Tree(KdTree<'a>),
    Brute(&'a PointCloud),
}

impl Index<'_> {
    /// Runs one query; returns the result size and, for cheesemaps, the
    /// voxels visited.
    pub fn query(&self, kind: QueryKind, param: f64, c: Point3) -> (usize, Option<usize>) {
        if kind == QueryKind::Knn {
            let k = param as usize;
            return match self {
                Index::Map(m) => {
                    let (n, s) = m.knn_search(&c, k).expect("k validated");
                    (black_box(n).len(), Some(s.voxels_visited))
                }
                Index::Tree(t) => (black_box(t.knn(&c, k)).len(), None),
                Index::Brute(cloud) => (black_box(brute_knn(cloud, &c, k)).len(), None),
            };
        }
        match kind {
            QueryKind::Sphere => self.kernel(&SphereKernel::new(c, param).expect("radius validated")),
            QueryKind::Cube => self.kernel(&BoxKernel::cube(c, param).expect("radius validated")),
            QueryKind::Cylinder => {
                self.kernel(&CylinderKernel::new((c.x, c.y), param, None).expect("radius validated"))
            }
            QueryKind::Knn => unreachable!(),
        }
    }

    fn kernel<K: cheesemap::Kernel>(&self, k: &K) -> (usize, Option<usize>) {
        match self {
            Index::Map(m) => {
                let (hits, s) = m.kernel_search(k);
                (black_box(hits).len(), Some(s.voxels_visited))
            }
            Index::Tree(t) => (black_box(t.radius_search(k)).len(), None),
            Index::Brute(cloud) => (black_box(brute_radius(cloud, k)).len(), None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub queries: u64,
    pub mean_ns: f64,
    pub median_ns: u64,
    pub p95_ns: u64,
}

/// Nearest-rank summary of latency samples.
pub fn summarize(mut samples: Vec<u64>) -> LatencyStats {
    assert!(!samples.is_empty());
    samples.sort_unstable();
    let n = samples.len();
    let rank = |q: f64| samples[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
    LatencyStats {
        queries: n as u64,
        mean_ns: samples.iter().map(|&s| s as f64).sum::<f64>() / n as f64,
        median_ns: rank(0.5),
        p95_ns: rank(0.95),
    }
}

fn time_queries(index: &Index<'_>, cloud: &PointCloud, cfg: &BenchConfig, param: f64) -> Vec<u64> {
    let budget = Duration::from_secs_f64(cfg.seconds);
    let worker = |seed: u64| {
        let mut centers = QueryCenters::new(cloud, seed);
        for c in centers.by_ref().take(cfg.warmup) {
            black_box(index.query(cfg.query, param, c));
        }
        let start = Instant::now();
        let mut samples = Vec::new();
        for c in centers {
            let t = Instant::now();
            black_box(index.query(cfg.query, param, c));
            // clock floor: a sample is never reported as 0 ns
            samples.push((t.elapsed().as_nanos() as u64).max(1));
            if start.elapsed() >= budget {
                break;
            }
        }
        samples
    };
    if cfg.threads == 1 {
        return worker(cfg.seed);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.threads as u64)
            .map(|t| {
                let worker = &worker;
                scope.spawn(move || worker(cfg.seed.wrapping_add(t)))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("query worker panicked"))
            .collect()
    })
}

fn measure(index: &Index<'_>, cloud: &PointCloud, cfg: &BenchConfig, mut row: BenchRecord) -> BenchRecord {
    let mut results = 0usize;
    let mut voxels = 0usize;
    let mut has_voxels = false;
    for c in QueryCenters::new(cloud, cfg.seed).take(cfg.counter_queries) {
        let (n, v) = index.query(cfg.query, row.param, c);
        results += n;
        if let Some(v) = v {
            voxels += v;
            has_voxels = true;
        }
    }
    let n = cfg.counter_queries as f64;
    row.mean_results = Some(results as f64 / n);
    row.mean_voxels = has_voxels.then(|| voxels as f64 / n);

    let stats = summarize(time_queries(index, cloud, cfg, row.param));
    row.queries = stats.queries;
    row.mean_ns = Some(stats.mean_ns);
    row.median_ns = Some(stats.median_ns);
    row.p95_ns = Some(stats.p95_ns);
    row
}

/// Runs the sweep, calling `on_row` as each row completes.
pub fn run_bench(
    cfg: &BenchConfig,
    dataset: &str,
    cloud: &PointCloud,
    mut on_row: impl FnMut(&BenchRecord),
) -> CliResult<Vec<BenchRecord>> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud.into());
    }
    let params = cfg.params();
    let mut rows = Vec::with_capacity(cfg.expected_rows());
    let mut emit = |row: BenchRecord, rows: &mut Vec<BenchRecord>| {
        on_row(&row);
        rows.push(row);
    };
    for &requested in &cfg.structures {
        let structure = if cfg.reorder {
            requested.with_reorder()
        } else {
            requested
        };
        match structure {
            Structure::Cheesemap {
                flavor,
                mode,
                reordered,
            } => {
                for &s in &cfg.cell_sizes {
                    let opts = BuildOptions::new(flavor, mode, CellSize::uniform(s)?)
                        .reorder(reordered)
                        .tau(cfg.tau)
                        .dense_cap(cfg.dense_cap);
                    match Cheesemap::build(cloud, &opts) {
                        Ok(map) => {
                            let index = Index::Map(map);
                            for &p in &params {
                                let row = BenchRecord::blank(dataset, structure, Some(s), cfg.query, p);
                                emit(measure(&index, cloud, cfg, row), &mut rows);
                            }
                        }
                        Err(e @ Error::Capacity { .. }) => {
                            for &p in &params {
                                let mut row = BenchRecord::blank(dataset, structure, Some(s), cfg.query, p);
                                row.status = "skipped".into();
                                row.note = e.to_string();
                                emit(row, &mut rows);
                            }
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            Structure::KdTree | Structure::Brute => {
                let index = if structure == Structure::KdTree {
                    Index::Tree(KdTree::build(cloud)?)
                } else {
                    Index::Brute(cloud)
                };
                for &p in &params {
                    let row = BenchRecord::blank(dataset, structure, None, cfg.query, p);
                    emit(measure(&index, cloud, cfg, row), &mut rows);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<csv output>".into(),
        source: e,
    })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> CliResult<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Geometric-mean speedup of one structure over the baseline, across the
/// parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub dataset: String,
    pub structure: String,
    pub cell_size: Option<f64>,
    pub query: String,
    pub baseline: String,
    pub speedup: f64,
    pub samples: usize,
}

/// Speedup = baseline mean latency / structure mean latency, matched on
/// dataset, query and parameter (and cell size when the baseline has one),
/// then averaged geometrically per (structure, cell size, query).
pub fn speedups(rows: &[BenchRecord], baseline: &str) -> CliResult<Vec<SpeedupRow>> {
    type Key = (String, String, u64, Option<u64>);
    let key = |r: &BenchRecord, cell: Option<f64>| -> Key {
        (r.dataset.clone(), r.query.clone(), r.param.to_bits(), cell.map(f64::to_bits))
    };
    let base: HashMap<Key, f64> = rows
        .iter()
        .filter(|r| r.is_ok() && r.structure == baseline)
        .filter_map(|r| Some((key(r, r.cell_size), r.mean_ns?)))
        .collect();
    if base.is_empty() {
        return Err(CliError::Usage(format!("no completed rows for baseline '{baseline}'")));
    }

    let mut order: Vec<(String, String, Option<u64>, String)> = Vec::new();
    let mut logs: HashMap<(String, String, Option<u64>, String), Vec<f64>> = HashMap::new();
    for r in rows.iter().filter(|r| r.is_ok() && r.structure != baseline) {
        let Some(mean) = r.mean_ns else { continue };
        let Some(b) = base.get(&key(r, r.cell_size)).or_else(|| base.get(&key(r, None))) else {
            continue;
        };
        let g = (r.dataset.clone(), r.structure.clone(), r.cell_size.map(f64::to_bits), r.query.clone());
        if !logs.contains_key(&g) {
            order.push(g.clone());
        }
        logs.entry(g).or_default().push((b / mean).ln());
    }
    Ok(order
        .into_iter()
        .map(|g| {
            let v = &logs[&g];
            SpeedupRow {
                dataset: g.0,
                structure: g.1,
                cell_size: g.2.map(f64::from_bits),
                query: g.3,
                baseline: baseline.to_string(),
                speedup: (v.iter().sum::<f64>() / v.len() as f64).exp(),
                samples: v.len(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let s = summarize((1..=100).collect());
        assert_eq!((s.median_ns, s.p95_ns, s.queries), (50, 95, 100));
        assert_eq!(s.mean_ns, 50.5);
        let one = summarize(vec![7]);
        assert_eq!((one.median_ns, one.p95_ns), (7, 7));
    }

    #[test]
    fn centers_are_seeded() {
        let cloud = PointCloud::new((0..50).map(|i| Point3::new(i as f64, 0., 0.)).collect()).unwrap();
        let a: Vec<Point3> = QueryCenters::new(&cloud, 4).take(20).collect();
        let b: Vec<Point3> = QueryCenters::new(&cloud, 4).take(20).collect();
        let c: Vec<Point3> = QueryCenters::new(&cloud, 5).take(20).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    fn row(structure: &str, cell: Option<f64>, param: f64, mean: f64) -> BenchRecord {
        let mut r = BenchRecord::blank("d", Structure::Brute, cell, QueryKind::Sphere, param);
        r.structure = structure.into();
        r.mean_ns = Some(mean);
        r
    }

    #[test]
    fn geometric_mean_speedup() {
        let rows = vec![
            row("brute", None, 1.0, 1000.0),
            row("brute", None, 2.0, 4000.0),
            row("dense3", Some(1.0), 1.0, 10.0),
            row("dense3", Some(1.0), 2.0, 400.0),
            row("dense3", Some(2.5), 1.0, 100.0),
        ];
        let s = speedups(&rows, "brute").unwrap();
        assert_eq!(s.len(), 2);
        // sqrt(100 · 10)
        assert!((s[0].speedup - 1000f64.sqrt()).abs() < 1e-9);
        assert_eq!(s[0].samples, 2);
        assert!((s[1].speedup - 10.0).abs() < 1e-9);
        assert!(speedups(&rows, "kdtree").is_err());
    }
}
