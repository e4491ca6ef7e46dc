use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cheesemap::io::write_cloud;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cheesemap_cli::bench::{read_csv, run_bench, speedups, write_csv, BenchConfig, QueryKind, SpeedupRow};
use cheesemap_cli::error::{exit, CliError, CliResult};
use cheesemap_cli::input::Input;
use cheesemap_cli::report::{build_report, ReportConfig};
use cheesemap_cli::structure::{parse_structures, Structure};
use cheesemap_cli::verify::{run_verify, subsample, VerifyConfig, DEFAULT_MAX_POINTS};

#[derive(Parser)]
#[command(name = "cheesemap", version, about = "Voxel-grid spatial index: benchmark, verify, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time queries over a sweep of structures, cell sizes and parameters.
    Bench(BenchArgs),
    /// Check every flavor against brute force.
    Verify(VerifyArgs),
    /// Print density, occupancy and memory figures as JSON.
    Report(ReportArgs),
    /// Write a synthetic cloud to a LAS or XYZ file.
    Generate(GenerateArgs),
    /// Geometric-mean speedups from a bench CSV.
    Speedup(SpeedupArgs),
}

#[derive(Args)]
struct Source {
    /// LAS or XYZ file.
    #[arg(long, conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Synthetic cloud, e.g. `uniform:n=100000,seed=1` or `lake:n=50000`.
    #[arg(long)]
    synthetic: Option<String>,
}

impl Source {
    fn resolve(&self) -> CliResult<Input> {
        Input::from_args(self.input.as_deref(), self.synthetic.as_deref())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = Structure::DEFAULTS)]
    structures: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2.5,5,7.5,10")]
    cell_sizes: Vec<f64>,
    #[arg(long, default_value = "sphere")]
    query: QueryKind,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,5,7.5,10")]
    radii: Vec<f64>,
    #[arg(long = "k", value_delimiter = ',', default_value = "5,10,20,30,40,50")]
    ks: Vec<usize>,
    /// Time budget per combination.
    #[arg(long, default_value_t = 1.0)]
    seconds: f64,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Untimed queries used for the voxel and result counters.
    #[arg(long, default_value_t = 100)]
    counter_queries: usize,
    /// Build cheesemap structures over a reordered copy of the points.
    #[arg(long)]
    reorder: bool,
    #[arg(long, default_value_t = cheesemap::store::DEFAULT_TAU)]
    tau: f64,
    /// Largest dense voxel table, in voxels.
    #[arg(long, default_value_t = cheesemap::store::DEFAULT_DENSE_CAP)]
    dense_cap: u128,
    /// Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Also print speedups against this structure id.
    #[arg(long)]
    speedup_vs: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2.5,5")]
    cell_sizes: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,5,7.5,10")]
    radii: Vec<f64>,
    #[arg(long = "k", value_delimiter = ',', default_value = "5,10,20,30,40,50")]
    ks: Vec<usize>,
    /// Query centers per combination.
    #[arg(long, default_value_t = 20)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse clouds larger than this.
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    max_points: usize,
    /// Verify a seeded random subset of this many points instead.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = cheesemap::store::DEFAULT_TAU)]
    tau: f64,
    /// Corrupt one stored handle per map; verification must then fail.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = Structure::DEFAULTS)]
    structures: String,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    cell_sizes: Vec<f64>,
    /// Estimate the weighted density from this many sampled points.
    #[arg(long)]
    density_sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = cheesemap::store::DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = cheesemap::store::DEFAULT_DENSE_CAP)]
    dense_cap: u128,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    synthetic: String,
    /// `.las` writes LAS, anything else XYZ.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SpeedupArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    baseline: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    let result = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report(a),
        Command::Generate(a) => generate(a),
        Command::Speedup(a) => speedup(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.map_or_else(|| "<stdout>".into(), Path::to_path_buf),
        source: e,
    }
}

fn bench(a: BenchArgs) -> CliResult<()> {
    let input = a.source.resolve()?;
    let mut cfg = BenchConfig::new(input, parse_structures(&a.structures)?, a.query);
    cfg.cell_sizes = a.cell_sizes;
    cfg.radii = a.radii;
    cfg.ks = a.ks;
    cfg.seconds = a.seconds;
    cfg.warmup = a.warmup;
    cfg.seed = a.seed;
    cfg.threads = a.threads;
    cfg.counter_queries = a.counter_queries;
    cfg.reorder = a.reorder;
    cfg.tau = a.tau;
    cfg.dense_cap = a.dense_cap;
    cfg.validate()?;

    let cloud = cfg.input.load()?;
    let dataset = cfg.input.id();
    eprintln!("{dataset}: {} points, {} rows planned", cloud.len(), cfg.expected_rows());
    let rows = run_bench(&cfg, &dataset, &cloud, |r| {
        eprintln!(
            "  {} s={} {}={} {}",
            r.structure,
            r.cell_size.map_or("-".into(), |s| s.to_string()),
            r.query,
            r.param,
            r.mean_ns.map_or_else(|| r.status.clone(), |m| format!("{m:.0} ns"))
        );
    })?;

    let out = open_output(a.output.as_deref())?;
    match a.format {
        Format::Csv => write_csv(out, &rows)?,
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out).and_then(|_| out.flush()).map_err(io_err(a.output.as_deref()))?;
        }
    }
    if let Some(base) = a.speedup_vs {
        print_speedups(&speedups(&rows, &base)?, a.output.is_none())?;
    }
    if let Some(r) = rows.iter().find(|r| !r.is_ok()).filter(|_| rows.iter().all(|r| !r.is_ok())) {
        return Err(CliError::AllSkipped(r.note.clone()));
    }
    Ok(())
}

/// Speedups go to stderr when stdout already carries the rows.
fn print_speedups(rows: &[SpeedupRow], to_stderr: bool) -> CliResult<()> {
    let mut w: Box<dyn Write> = if to_stderr {
        Box::new(io::stderr().lock())
    } else {
        Box::new(io::stdout().lock())
    };
    let mut csv = csv::Writer::from_writer(&mut w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush().map_err(io_err(None))?;
    Ok(())
}

fn verify(a: VerifyArgs) -> CliResult<()> {
    let input = a.source.resolve()?;
    let mut cloud = input.load()?;
    if let Some(n) = a.subsample {
        cloud = subsample(&cloud, n, a.seed)?;
    }
    let cfg = VerifyConfig {
        cell_sizes: a.cell_sizes,
        radii: a.radii,
        ks: a.ks,
        queries: a.queries,
        seed: a.seed,
        max_points: a.max_points,
        tau: a.tau,
        inject_fault: a.inject_fault,
    };
    let report = run_verify(&cfg, &cloud, |line| println!("{line}"))?;
    println!(
        "{}: {} checks, {} mismatches, {} skipped",
        input.id(),
        report.checks,
        report.mismatches.len(),
        report.skipped.len()
    );
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch(report.mismatches.len()))
    }
}

fn report(a: ReportArgs) -> CliResult<()> {
    let input = a.source.resolve()?;
    let cloud = input.load()?;
    let cfg = ReportConfig {
        structures: parse_structures(&a.structures)?,
        cell_sizes: a.cell_sizes,
        density_sample: a.density_sample.map(|n| (n, a.seed)),
        tau: a.tau,
        dense_cap: a.dense_cap,
    };
    let r = build_report(&cfg, &input.id(), &cloud)?;
    let mut out = open_output(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &r)?;
    writeln!(out).and_then(|_| out.flush()).map_err(io_err(a.output.as_deref()))?;
    Ok(())
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let cloud = Input::from_args(None, Some(&a.synthetic))?.load()?;
    write_cloud(&cloud, &a.output)?;
    eprintln!("wrote {} points to {}", cloud.len(), a.output.display());
    Ok(())
}

fn speedup(a: SpeedupArgs) -> CliResult<()> {
    let rows = read_csv(&a.csv)?;
    print_speedups(&speedups(&rows, &a.baseline)?, false)
}
