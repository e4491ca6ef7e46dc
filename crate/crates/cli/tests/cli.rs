use std::path::Path;
use std::process::{Command, Output};

use cheesemap_cli::bench::{read_csv, BenchRecord};

fn cheesemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cheesemap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bench_to(path: &Path, extra: &[&str]) -> Vec<BenchRecord> {
    let mut args = vec![
        "bench",
        "--synthetic",
        "clusters:n=3000,seed=4",
        "--seconds",
        "0.01",
        "--counter-queries",
        "25",
        "--output",
        path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = cheesemap(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    read_csv(path).unwrap()
}

#[test]
fn counters_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--structures", "sparse3,mixed2", "--cell-sizes", "2.5", "--radii", "1,5"];
    let a = bench_to(&dir.path().join("a.csv"), &args);
    let b = bench_to(&dir.path().join("b.csv"), &args);
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.mean_voxels, x.mean_results), (y.mean_voxels, y.mean_results));
    }
    // same centers, same answers, whatever the structure
    assert_eq!(a[0].mean_results, a[2].mean_results);
}

#[test]
fn reorder_flag_marks_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = bench_to(
        &dir.path().join("r.csv"),
        &["--structures", "dense3,kdtree", "--cell-sizes", "5", "--query", "cube", "--radii", "2", "--reorder"],
    );
    assert_eq!(rows[0].structure, "dense3-reordered");
    assert!(rows[0].reordered);
    assert!(!rows[1].reordered);
}

#[test]
fn json_output_and_speedups() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    bench_to(&csv, &["--structures", "sparse3,brute", "--cell-sizes", "2.5", "--radii", "2"]);
    let out = cheesemap(&["speedup", "--csv", csv.to_str().unwrap(), "--baseline", "brute"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dataset,structure,cell_size,query,baseline,speedup,samples"));
    assert_eq!(text.lines().count(), 2);

    let out = cheesemap(&[
        "bench",
        "--synthetic",
        "uniform:n=500",
        "--structures",
        "kdtree",
        "--radii",
        "1",
        "--seconds",
        "0.01",
        "--format",
        "json",
    ]);
    let rows: Vec<BenchRecord> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(cheesemap(&["bench", "--bogus"]).status.code(), Some(2));
    assert_eq!(cheesemap(&["bench"]).status.code(), Some(2));
    assert_eq!(
        cheesemap(&["bench", "--synthetic", "uniform:n=10", "--structures", "octree"]).status.code(),
        Some(2)
    );
    assert_eq!(cheesemap(&["report", "--input", "/nonexistent/cloud.las"]).status.code(), Some(3));
    let out = cheesemap(&[
        "bench",
        "--synthetic",
        "uniform:n=100",
        "--structures",
        "dense3",
        "--cell-sizes",
        "0.01",
        "--dense-cap",
        "1000",
        "--radii",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sparse or mixed"));
}

#[test]
fn verify_cap_and_subsample() {
    let big = cheesemap(&["verify", "--synthetic", "uniform:n=3000", "--max-points", "1000"]);
    assert_eq!(big.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&big.stderr).contains("--subsample"));
    let sub = cheesemap(&[
        "verify",
        "--synthetic",
        "uniform:n=3000",
        "--max-points",
        "1000",
        "--subsample",
        "800",
        "--queries",
        "2",
        "--cell-sizes",
        "2.5",
    ]);
    assert_eq!(sub.status.code(), Some(0));
}

#[test]
fn generate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["lake.las", "lake.xyz"] {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let out = cheesemap(&["generate", "--synthetic", "lake:n=1500,seed=2", "--output", p]);
        assert!(out.status.success());
        let out = cheesemap(&["report", "--input", p, "--structures", "sparse3,mixed3", "--cell-sizes", "1,2"]);
        assert!(out.status.success());
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(json["dataset"], "lake");
        assert_eq!(json["points"], 1500);
        assert_eq!(json["structures"].as_array().unwrap().len(), 4);
        assert_eq!(json["structures"][0]["memory"]["handle_bytes"], 12_000);
    }
}
