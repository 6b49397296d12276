//! Command-line entry point wiring the generators, the exact oracle, both
//! sketches, and the benchmark harness.
//!
//! Every randomized stage draws from the published seedable generator, so
//! any invocation with an explicit `--seed` produces byte-identical output
//! files on every platform. Exit codes: 0 on success, 1 on runtime errors
//! (one-line diagnostic on stderr), 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corrsketch::cm::Aggregator;
use corrsketch::datagen::{self, Dependence, DistributionSpec, Scale, Shape};
use corrsketch::exact::{chi2_critical, ExactTable, DEFAULT_ALPHABET_CAP};
use corrsketch::harness::{
    self, compare_csv, grid_pivot_csv, grid_raw_csv, manifest_json, CompareConfig, ErrorDomain,
    ErrorRecord, GridConfig, ManifestInput,
};
use corrsketch::im::SignEnsembleConfig;
use corrsketch::stream::open_stream;
use corrsketch::{EnsembleConfig, Error};

#[derive(Parser)]
#[command(
    name = "corrsketch",
    version,
    about = "Streaming estimators for the l2 distance between a pair stream's joint distribution and the product of its marginals",
    propagate_version = true
)]
struct Cli {
    /// Seed for every randomized stage (64-bit integer).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress progress lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic pair stream, or the four-dataset benchmark bundle.
    Gen(GenArgs),
    /// Exact oracle report (l1, l2, chi-squared) for a stream file.
    Exact(ExactArgs),
    /// Run a sketch ensemble over a stream file.
    #[command(subcommand)]
    Sketch(SketchCommand),
    /// Reproduce the benchmark experiments.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct GenArgs {
    #[command(subcommand)]
    bundle: Option<GenBundle>,

    /// Alphabet size (symbols are 1..=n).
    #[arg(long)]
    n: Option<u32>,

    /// Number of pairs to generate.
    #[arg(long = "N")]
    len: Option<u64>,

    /// Marginal/joint shape.
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Shape>,

    /// Whether the two coordinates are sampled independently.
    #[arg(long, value_parser = parse_dependence)]
    dep: Option<Dependence>,

    /// Output stream file.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Assign zipfian ranks in symbol order instead of a seeded permutation.
    #[arg(long)]
    identity_perm: bool,
}

#[derive(Subcommand)]
enum GenBundle {
    /// The four benchmark datasets (shape x dependence) plus manifest.csv.
    Paper {
        /// `full` (n=10^4, N=10^6) or `desk` (n=10^3, N=10^5).
        #[arg(long, value_parser = parse_scale)]
        scale: Scale,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExactArgs {
    /// Stream file to analyze.
    stream: PathBuf,

    /// Alphabet cap for the dense table (memory grows with its square).
    #[arg(long, default_value_t = DEFAULT_ALPHABET_CAP)]
    cap: u32,
}

#[derive(Subcommand)]
enum SketchCommand {
    /// Counter-matrix ensemble.
    Cm(SketchCmArgs),
    /// Sign-sketch ensemble.
    Im(SketchImArgs),
}

#[derive(Args)]
struct SketchCmArgs {
    /// Stream file to sketch.
    stream: PathBuf,

    /// Side length of each counter matrix.
    #[arg(long = "A")]
    side: u32,

    /// Number of independently hashed sketches.
    #[arg(long = "B", default_value_t = 1)]
    runs: u32,

    /// Combination rule over the ensemble.
    #[arg(long, default_value = "median", value_parser = parse_aggregator)]
    agg: Aggregator,

    /// Replace both hashes with a=1, b=0 (testing aid: with A >= n the
    /// sketch reproduces the exact table).
    #[arg(long)]
    debug_identity_hash: bool,
}

#[derive(Args)]
struct SketchImArgs {
    /// Stream file to sketch.
    stream: PathBuf,

    /// Number of independent sign-sketch copies.
    #[arg(long)]
    copies: u32,

    /// Combination rule over the copies.
    #[arg(long, default_value = "mean", value_parser = parse_aggregator)]
    agg: Aggregator,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Grid search over sketch side length and ensemble size.
    Grid(BenchGridArgs),
    /// Equal-space comparison of the two estimators.
    Compare(BenchCompareArgs),
}

#[derive(Args)]
struct BenchGridArgs {
    /// Dataset stream file.
    dataset: PathBuf,

    /// Side lengths to sweep.
    #[arg(long = "A-values", value_delimiter = ',', default_values_t = [2u32, 4, 8, 16, 32])]
    side_values: Vec<u32>,

    /// Ensemble sizes to sweep.
    #[arg(long = "B-values", value_delimiter = ',', default_values_t = [1u32, 4, 16, 64, 256])]
    run_values: Vec<u32>,

    /// Fresh-seed repetitions per cell.
    #[arg(long, default_value_t = 5)]
    repeats: u32,

    /// Combination rule within each ensemble.
    #[arg(long, default_value = "median", value_parser = parse_aggregator)]
    agg: Aggregator,

    /// Compare estimates in the `squared` domain or after square roots (`norm`).
    #[arg(long, default_value = "squared", value_parser = parse_error_domain)]
    error_domain: ErrorDomain,

    /// Precomputed exact reference (squared l2); computed by the oracle when
    /// absent.
    #[arg(long)]
    reference: Option<f64>,

    /// Directory for grid_raw.csv and grid_pivot.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Also write a JSON replay manifest (seeds, hash parameters, versions).
    #[arg(long)]
    json_manifest: Option<PathBuf>,

    /// Measure ingestion throughput and record it in the manifest (the one
    /// machine-dependent manifest field).
    #[arg(long)]
    measure_throughput: bool,
}

#[derive(Args)]
struct BenchCompareArgs {
    /// Dataset stream file.
    dataset: PathBuf,

    /// Side lengths to compare at (space is matched at A^2 per estimator).
    #[arg(long = "A-values", value_delimiter = ',', default_values_t = [2u32, 4, 8, 16])]
    side_values: Vec<u32>,

    /// Fresh-seed repetitions per side value.
    #[arg(long, default_value_t = 10)]
    repeats: u32,

    /// Combination rule over the sign-sketch copies.
    #[arg(long, default_value = "mean", value_parser = parse_aggregator)]
    im_agg: Aggregator,

    /// Compare estimates in the `squared` domain or after square roots (`norm`).
    #[arg(long, default_value = "squared", value_parser = parse_error_domain)]
    error_domain: ErrorDomain,

    /// Precomputed exact reference (squared l2).
    #[arg(long)]
    reference: Option<f64>,

    /// Directory for compare.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Also write a JSON replay manifest.
    #[arg(long)]
    json_manifest: Option<PathBuf>,

    /// Measure ingestion throughput and record it in the manifest.
    #[arg(long)]
    measure_throughput: bool,
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_dependence(s: &str) -> Result<Dependence, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_aggregator(s: &str) -> Result<Aggregator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_error_domain(s: &str) -> Result<ErrorDomain, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Line-buffered stdout write that exits quietly when the reader has gone
/// away (e.g. piping into `head`), instead of panicking on EPIPE.
fn emit(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if writeln!(lock, "{args}").is_err() {
        std::process::exit(0);
    }
}

macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen(args) => run_gen(args, cli.seed, cli.quiet),
        Command::Exact(args) => run_exact(args),
        Command::Sketch(SketchCommand::Cm(args)) => run_sketch_cm(args, cli.seed),
        Command::Sketch(SketchCommand::Im(args)) => run_sketch_im(args, cli.seed),
        Command::Bench(BenchCommand::Grid(args)) => run_bench_grid(args, cli.seed, cli.quiet),
        Command::Bench(BenchCommand::Compare(args)) => run_bench_compare(args, cli.seed, cli.quiet),
    }
}

fn run_gen(args: GenArgs, seed: u64, quiet: bool) -> Result<ExitCode, Error> {
    if let Some(GenBundle::Paper { scale, out }) = args.bundle {
        let records = datagen::make_benchmark_datasets(&out, scale, seed)?;
        if !quiet {
            for r in &records {
                out!(
                    "wrote {} (n={}, N={}, l2={})",
                    r.path.display(),
                    r.n,
                    r.len,
                    r.l2
                );
            }
            out!("wrote {}", out.join("manifest.csv").display());
        }
        return Ok(ExitCode::SUCCESS);
    }
    let (Some(n), Some(len), Some(shape), Some(dep), Some(out)) =
        (args.n, args.len, args.shape, args.dep, args.out)
    else {
        eprintln!(
            "usage: corrsketch gen --n <N> --N <LEN> --shape <SHAPE> --dep <DEP> --out <PATH>"
        );
        return Ok(ExitCode::from(2));
    };
    let spec = DistributionSpec {
        n,
        dependence: dep,
        shape,
        seed,
    };
    datagen::generate_file(&out, &spec, len, args.identity_perm)?;
    if !quiet {
        out!("wrote {} ({} pairs over n={})", out.display(), len, n);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_exact(args: ExactArgs) -> Result<ExitCode, Error> {
    let src = open_stream(&args.stream)?;
    let mut table = ExactTable::with_cap(src.header().n, args.cap)?;
    table.ingest_all(src)?;
    let report = table.report()?;
    let critical = chi2_critical(report.dof, 0.05)?;
    out!("l1,l2,l2_squared,chi2,dof,chi2_critical,reject_independence");
    out!(
        "{},{},{},{},{},{},{}",
        report.l1,
        report.l2,
        report.l2_squared,
        report.chi2,
        report.dof,
        critical,
        report.chi2 > critical
    );
    Ok(ExitCode::SUCCESS)
}

fn run_sketch_cm(args: SketchCmArgs, seed: u64) -> Result<ExitCode, Error> {
    let cfg = EnsembleConfig {
        side: args.side,
        runs: args.runs,
        aggregator: args.agg,
        seed,
    };
    let src = open_stream(&args.stream)?;
    let result = if args.debug_identity_hash {
        cfg.run_with_identity_hashes(src)?
    } else {
        cfg.run(src)?
    };
    out!("upsilon,raw_l2sq,A,B,agg,seed");
    out!(
        "{},{},{},{},{},{}",
        result.estimate,
        result.raw_l2sq,
        args.side,
        args.runs,
        args.agg.name(),
        seed
    );
    for run in &result.runs {
        out!(
            "{},{},{},{},{},{}",
            run.estimate.corrected_l2sq,
            run.estimate.raw_l2sq,
            args.side,
            args.runs,
            args.agg.name(),
            run.seed
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sketch_im(args: SketchImArgs, seed: u64) -> Result<ExitCode, Error> {
    let cfg = SignEnsembleConfig {
        copies: args.copies,
        aggregator: args.agg,
        seed,
    };
    let result = cfg.run(open_stream(&args.stream)?)?;
    out!("upsilon,t_value,copies,agg,seed");
    out!(
        "{},,{},{},{}",
        result.estimate,
        args.copies,
        args.agg.name(),
        seed
    );
    for run in &result.runs {
        out!(
            "{},{},{},{},{}",
            run.estimate.l2sq,
            run.estimate.signed_sum,
            args.copies,
            args.agg.name(),
            run.seed
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn progress_printer(quiet: bool) -> impl FnMut(&ErrorRecord) {
    move |record: &ErrorRecord| {
        if !quiet {
            out!(
                "{} A={} B={} repeat={} mult_error={}",
                record.estimator.name(),
                record.side,
                record.runs,
                record.repeat,
                record.mult_error
            );
        }
    }
}

fn run_bench_grid(args: BenchGridArgs, seed: u64, quiet: bool) -> Result<ExitCode, Error> {
    let cfg = GridConfig {
        side_values: args.side_values,
        run_values: args.run_values,
        repeats: args.repeats,
        dataset: args.dataset.clone(),
        seed,
        aggregator: args.agg,
        error_domain: args.error_domain,
        reference: args.reference,
    };
    let output = harness::run_grid_with_progress(&cfg, progress_printer(quiet))?;
    std::fs::create_dir_all(&args.out_dir)?;
    let raw_path = args.out_dir.join("grid_raw.csv");
    let pivot_path = args.out_dir.join("grid_pivot.csv");
    std::fs::write(&raw_path, grid_raw_csv(&output.records))?;
    std::fs::write(&pivot_path, grid_pivot_csv(&output.pivot))?;
    if !quiet {
        out!("wrote {}", raw_path.display());
        out!("wrote {}", pivot_path.display());
    }
    if let Some(manifest_path) = args.json_manifest {
        let throughput = if args.measure_throughput {
            Some(harness::measure_throughput(32, 10_000, 2_000_000, seed)?)
        } else {
            None
        };
        let manifest = manifest_json(&ManifestInput {
            command: "bench grid",
            dataset: &args.dataset,
            seed,
            error_domain: args.error_domain,
            reference: output.reference,
            records: &output.records,
            member_runs: &output.member_runs,
            throughput,
        });
        std::fs::write(&manifest_path, manifest)?;
        if !quiet {
            out!("wrote {}", manifest_path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_bench_compare(args: BenchCompareArgs, seed: u64, quiet: bool) -> Result<ExitCode, Error> {
    let cfg = CompareConfig {
        side_values: args.side_values,
        repeats: args.repeats,
        dataset: args.dataset.clone(),
        seed,
        error_domain: args.error_domain,
        im_aggregator: args.im_agg,
        reference: args.reference,
    };
    let output = harness::run_comparison_with_progress(&cfg, progress_printer(quiet))?;
    std::fs::create_dir_all(&args.out_dir)?;
    let compare_path = args.out_dir.join("compare.csv");
    std::fs::write(&compare_path, compare_csv(&output.rows))?;
    if !quiet {
        out!("wrote {}", compare_path.display());
    }
    if let Some(manifest_path) = args.json_manifest {
        let throughput = if args.measure_throughput {
            Some(harness::measure_throughput(32, 10_000, 2_000_000, seed)?)
        } else {
            None
        };
        let manifest = manifest_json(&ManifestInput {
            command: "bench compare",
            dataset: &args.dataset,
            seed,
            error_domain: args.error_domain,
            reference: output.reference,
            records: &output.records,
            member_runs: &output.member_runs,
            throughput,
        });
        std::fs::write(&manifest_path, manifest)?;
        if !quiet {
            out!("wrote {}", manifest_path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
