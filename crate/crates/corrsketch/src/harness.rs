//! Experiment harness: the parameter grid over sketch dimensions, the
//! equal-space comparison between the counter matrix and the sign sketch,
//! the multiplicative-error metric, and deterministic CSV/JSON outputs.
//!
//! Every cell of an experiment derives its own seed from the global one, so
//! any single record can be replayed bit-for-bit in isolation. Datasets are
//! re-streamed from disk for every run and never loaded into memory wholesale.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cm::{Aggregator, CmRun, EnsembleConfig};
use crate::error::{Error, Result};
use crate::exact::ExactTable;
use crate::im::{ImRun, SignEnsembleConfig, SignSketch};
use crate::rng::{stream_seed, Rng64, Xoshiro256PlusPlus};
use crate::stream::{open_stream, SamplePair};
use crate::CounterMatrix;

/// Whether errors are measured on squared-l2 estimates (the sketches'
/// native output) or after taking square roots of both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorDomain {
    Squared,
    Norm,
}

impl ErrorDomain {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorDomain::Squared => "squared",
            ErrorDomain::Norm => "norm",
        }
    }

    fn apply(&self, value: f64) -> f64 {
        match self {
            ErrorDomain::Squared => value,
            ErrorDomain::Norm => value.max(0.0).sqrt(),
        }
    }
}

impl std::str::FromStr for ErrorDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(ErrorDomain::Squared),
            "norm" => Ok(ErrorDomain::Norm),
            other => Err(Error::InvalidParameter(format!(
                "unknown error domain `{other}`, expected `squared` or `norm`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    CounterMatrix,
    SignSketch,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::CounterMatrix => "cm",
            EstimatorKind::SignSketch => "im",
        }
    }
}

/// One experiment cell: estimator, dimensions, repeat index, outcome.
#[derive(Debug, Clone)]
pub struct ErrorRecord {
    pub estimator: EstimatorKind,
    /// Sketch side length A (for the sign sketch: the matched-space knob,
    /// with `runs` = A^2 copies).
    pub side: u32,
    /// Ensemble size: B for the counter matrix, copy count for the sign
    /// sketch.
    pub runs: u32,
    pub repeat: u32,
    pub estimate: f64,
    pub reference: f64,
    pub mult_error: f64,
    pub seed: u64,
}

/// Relative deviation `|estimate - reference| / reference`.
///
/// The reference must be strictly positive; datasets whose exact distance is
/// zero (or negative through misuse) are reported with the offending value
/// rather than silently divided by.
pub fn mult_error(estimate: f64, reference: f64) -> Result<f64> {
    if reference <= 0.0 {
        return Err(Error::UndefinedReference(reference));
    }
    Ok((estimate - reference).abs() / reference)
}

/// One oracle pass over a dataset returning the exact squared l2 difference,
/// the default benchmark reference.
pub fn compute_reference(dataset: &Path) -> Result<f64> {
    let src = open_stream(dataset)?;
    let mut table = ExactTable::new(src.header().n)?;
    table.ingest_all(src)?;
    let (l2_squared, _) = table.l2_diff()?;
    Ok(l2_squared)
}

/// Grid experiment: counter-matrix ensembles at every combination of side
/// length and run count, repeated with fresh seeds.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub side_values: Vec<u32>,
    pub run_values: Vec<u32>,
    pub repeats: u32,
    pub dataset: PathBuf,
    pub seed: u64,
    pub aggregator: Aggregator,
    pub error_domain: ErrorDomain,
    /// Precomputed exact squared l2 difference; computed from the dataset
    /// when absent.
    pub reference: Option<f64>,
}

impl GridConfig {
    pub fn new(dataset: PathBuf, seed: u64) -> Self {
        Self {
            side_values: vec![2, 4, 8, 16, 32],
            run_values: vec![1, 4, 16, 64, 256],
            repeats: 5,
            dataset,
            seed,
            aggregator: Aggregator::Median,
            error_domain: ErrorDomain::Squared,
            reference: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.side_values.is_empty() || self.side_values.iter().any(|&a| a < 2) {
            return Err(Error::InvalidParameter(
                "side values must be non-empty and at least 2".into(),
            ));
        }
        if self.run_values.is_empty() || self.run_values.iter().any(|&b| b < 1) {
            return Err(Error::InvalidParameter(
                "run values must be non-empty and at least 1".into(),
            ));
        }
        if self.repeats < 1 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean multiplicative error over repeats for one grid cell.
#[derive(Debug, Clone, Copy)]
pub struct PivotCell {
    pub side: u32,
    pub runs: u32,
    pub mean_mult_error: f64,
}

#[derive(Debug, Clone)]
pub struct GridOutput {
    pub records: Vec<ErrorRecord>,
    pub pivot: Vec<PivotCell>,
    pub reference: f64,
    /// Per-record ensemble members, aligned with `records`; feeds the
    /// replay manifest.
    pub member_runs: Vec<MemberRuns>,
}

impl GridOutput {
    pub fn pivot_error(&self, side: u32, runs: u32) -> Option<f64> {
        self.pivot
            .iter()
            .find(|c| c.side == side && c.runs == runs)
            .map(|c| c.mean_mult_error)
    }
}

/// Execute the grid. Cells run in a fixed (side, runs, repeat) order and
/// cell `k` uses the derived seed `stream_seed(seed, k)`, so re-running any
/// single cell through the same ensemble code reproduces it bit-for-bit.
pub fn run_grid(cfg: &GridConfig) -> Result<GridOutput> {
    run_grid_with_progress(cfg, |_| {})
}

pub fn run_grid_with_progress(
    cfg: &GridConfig,
    mut progress: impl FnMut(&ErrorRecord),
) -> Result<GridOutput> {
    cfg.validate()?;
    let reference = match cfg.reference {
        Some(r) => r,
        None => compute_reference(&cfg.dataset)?,
    };
    if reference <= 0.0 {
        return Err(Error::UndefinedReference(reference));
    }
    let domain_reference = cfg.error_domain.apply(reference);

    let mut records = Vec::new();
    let mut member_runs = Vec::new();
    let mut cell_index = 0u64;
    for &side in &cfg.side_values {
        for &runs in &cfg.run_values {
            for repeat in 0..cfg.repeats {
                let seed = stream_seed(cfg.seed, cell_index);
                cell_index += 1;
                let ensemble = EnsembleConfig {
                    side,
                    runs,
                    aggregator: cfg.aggregator,
                    seed,
                };
                let outcome = ensemble.run(open_stream(&cfg.dataset)?)?;
                let estimate = cfg.error_domain.apply(outcome.estimate);
                let record = ErrorRecord {
                    estimator: EstimatorKind::CounterMatrix,
                    side,
                    runs,
                    repeat,
                    estimate,
                    reference: domain_reference,
                    mult_error: mult_error(estimate, domain_reference)?,
                    seed,
                };
                progress(&record);
                records.push(record);
                member_runs.push(MemberRuns::Cm(outcome.runs));
            }
        }
    }

    let mut pivot = Vec::new();
    for &side in &cfg.side_values {
        for &runs in &cfg.run_values {
            let errors: Vec<f64> = records
                .iter()
                .filter(|r| r.side == side && r.runs == runs)
                .map(|r| r.mult_error)
                .collect();
            pivot.push(PivotCell {
                side,
                runs,
                mean_mult_error: crate::numeric::mean(&errors),
            });
        }
    }
    Ok(GridOutput {
        records,
        pivot,
        reference: domain_reference,
        member_runs,
    })
}

/// Equal-space comparison: for each side length A, a single counter matrix
/// (A^2 counters) against A^2 sign-sketch copies, repeated with fresh seeds.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub side_values: Vec<u32>,
    pub repeats: u32,
    pub dataset: PathBuf,
    pub seed: u64,
    pub error_domain: ErrorDomain,
    /// Sign-sketch copies are combined with this rule (mean by default).
    pub im_aggregator: Aggregator,
    pub reference: Option<f64>,
}

impl CompareConfig {
    pub fn new(dataset: PathBuf, seed: u64) -> Self {
        Self {
            side_values: vec![2, 4, 8, 16],
            repeats: 10,
            dataset,
            seed,
            error_domain: ErrorDomain::Squared,
            im_aggregator: Aggregator::Mean,
            reference: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompareRow {
    pub side: u32,
    pub cm_mean_error: f64,
    pub im_mean_error: f64,
}

/// Per-record ensemble membership for the comparison manifest.
#[derive(Debug, Clone)]
pub enum MemberRuns {
    Cm(Vec<CmRun>),
    Im(Vec<ImRun>),
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub records: Vec<ErrorRecord>,
    pub rows: Vec<CompareRow>,
    pub reference: f64,
    pub member_runs: Vec<MemberRuns>,
}

/// Execute the comparison. For each side value, cell seeds alternate
/// cm/im in repeat order with the same sequential derivation as the grid.
pub fn run_comparison(cfg: &CompareConfig) -> Result<CompareOutput> {
    run_comparison_with_progress(cfg, |_| {})
}

pub fn run_comparison_with_progress(
    cfg: &CompareConfig,
    mut progress: impl FnMut(&ErrorRecord),
) -> Result<CompareOutput> {
    if cfg.side_values.is_empty() || cfg.side_values.iter().any(|&a| a < 2) {
        return Err(Error::InvalidParameter(
            "side values must be non-empty and at least 2".into(),
        ));
    }
    if cfg.repeats < 1 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let reference = match cfg.reference {
        Some(r) => r,
        None => compute_reference(&cfg.dataset)?,
    };
    if reference <= 0.0 {
        return Err(Error::UndefinedReference(reference));
    }
    let domain_reference = cfg.error_domain.apply(reference);

    let mut records = Vec::new();
    let mut member_runs = Vec::new();
    let mut cell_index = 0u64;
    for &side in &cfg.side_values {
        for repeat in 0..cfg.repeats {
            let cm_seed = stream_seed(cfg.seed, cell_index);
            let im_seed = stream_seed(cfg.seed, cell_index + 1);
            cell_index += 2;

            let ensemble = EnsembleConfig {
                side,
                runs: 1,
                aggregator: Aggregator::Median,
                seed: cm_seed,
            };
            let outcome = ensemble.run(open_stream(&cfg.dataset)?)?;
            let estimate = cfg.error_domain.apply(outcome.estimate);
            let record = ErrorRecord {
                estimator: EstimatorKind::CounterMatrix,
                side,
                runs: 1,
                repeat,
                estimate,
                reference: domain_reference,
                mult_error: mult_error(estimate, domain_reference)?,
                seed: cm_seed,
            };
            progress(&record);
            records.push(record);
            member_runs.push(MemberRuns::Cm(outcome.runs));

            let copies = side * side;
            let sign_cfg = SignEnsembleConfig {
                copies,
                aggregator: cfg.im_aggregator,
                seed: im_seed,
            };
            let outcome = sign_cfg.run(open_stream(&cfg.dataset)?)?;
            let estimate = cfg.error_domain.apply(outcome.estimate);
            let record = ErrorRecord {
                estimator: EstimatorKind::SignSketch,
                side,
                runs: copies,
                repeat,
                estimate,
                reference: domain_reference,
                mult_error: mult_error(estimate, domain_reference)?,
                seed: im_seed,
            };
            progress(&record);
            records.push(record);
            member_runs.push(MemberRuns::Im(outcome.runs));
        }
    }

    let mut rows = Vec::new();
    for &side in &cfg.side_values {
        let mean_of = |kind: EstimatorKind| {
            let errors: Vec<f64> = records
                .iter()
                .filter(|r| r.side == side && r.estimator == kind)
                .map(|r| r.mult_error)
                .collect();
            crate::numeric::mean(&errors)
        };
        rows.push(CompareRow {
            side,
            cm_mean_error: mean_of(EstimatorKind::CounterMatrix),
            im_mean_error: mean_of(EstimatorKind::SignSketch),
        });
    }
    Ok(CompareOutput {
        records,
        rows,
        reference: domain_reference,
        member_runs,
    })
}

/// Raw records as CSV, one row per cell in execution order.
pub fn grid_raw_csv(records: &[ErrorRecord]) -> String {
    let mut out = String::from("estimator,A,B,repeat,upsilon,reference,mult_error,seed\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.estimator.name(),
            r.side,
            r.runs,
            r.repeat,
            r.estimate,
            r.reference,
            r.mult_error,
            r.seed
        )
        .expect("string write");
    }
    out
}

/// Mean-over-repeats pivot as CSV.
pub fn grid_pivot_csv(pivot: &[PivotCell]) -> String {
    let mut out = String::from("estimator,A,B,mean_mult_error\n");
    for c in pivot {
        writeln!(out, "cm,{},{},{}", c.side, c.runs, c.mean_mult_error).expect("string write");
    }
    out
}

/// Per-side comparison table as CSV: one row per side value, one error
/// column per estimator.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("A,cm_mean_error,im_mean_error\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.side, r.cm_mean_error, r.im_mean_error).expect("string write");
    }
    out
}

/// Ingestion rates measured over a synthetic in-memory pair buffer, so
/// update cost is isolated from parsing and I/O.
#[derive(Debug, Clone, Copy)]
pub struct Throughput {
    pub cm_updates_per_sec: f64,
    pub im_updates_per_sec: f64,
}

/// Time `updates` sketch updates for both estimators on one warm sketch
/// each. The pair buffer cycles through 4096 pseudo-random symbols drawn
/// once up front.
pub fn measure_throughput(side: u32, alphabet: u32, updates: u64, seed: u64) -> Result<Throughput> {
    let mut rng = Xoshiro256PlusPlus::new(seed);
    let buffer: Vec<SamplePair> = (0..4096)
        .map(|_| {
            SamplePair::new(
                rng.next_below(alphabet as u64) as u32 + 1,
                rng.next_below(alphabet as u64) as u32 + 1,
            )
        })
        .collect();

    let mut cm = CounterMatrix::new(side, &mut rng)?;
    // Warm-up pass keeps one-time page faults out of the timed loop.
    for &p in &buffer {
        cm.update(p)?;
    }
    let start = Instant::now();
    let mut fed = 0u64;
    'outer_cm: loop {
        for &p in &buffer {
            cm.update(p)?;
            fed += 1;
            if fed >= updates {
                break 'outer_cm;
            }
        }
    }
    let cm_rate = fed as f64 / start.elapsed().as_secs_f64();
    std::hint::black_box(cm.total());

    let mut im = SignSketch::new(&mut rng);
    for &p in &buffer {
        im.update(p)?;
    }
    let start = Instant::now();
    let mut fed = 0u64;
    'outer_im: loop {
        for &p in &buffer {
            im.update(p)?;
            fed += 1;
            if fed >= updates {
                break 'outer_im;
            }
        }
    }
    let im_rate = fed as f64 / start.elapsed().as_secs_f64();
    std::hint::black_box(im.accumulators());

    Ok(Throughput {
        cm_updates_per_sec: cm_rate,
        im_updates_per_sec: im_rate,
    })
}

/// Replay metadata for a finished experiment: generator description, global
/// seed, per-record derived seeds, and the hash parameters of every ensemble
/// member, as plain integers. Optional throughput rates are the only
/// machine-dependent content and are absent unless measured.
pub struct ManifestInput<'a> {
    pub command: &'a str,
    pub dataset: &'a Path,
    pub seed: u64,
    pub error_domain: ErrorDomain,
    pub reference: f64,
    pub records: &'a [ErrorRecord],
    pub member_runs: &'a [MemberRuns],
    pub throughput: Option<Throughput>,
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                write!(out, "\\u{:04x}", c as u32).expect("string write");
            }
            c => out.push(c),
        }
    }
    out
}

pub fn manifest_json(input: &ManifestInput<'_>) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    writeln!(out, "  \"tool\": \"corrsketch\",").unwrap();
    writeln!(out, "  \"version\": \"{}\",", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(
        out,
        "  \"rng\": \"xoshiro256++ seeded via splitmix64; child seed = seed XOR splitmix64(index)\","
    )
    .unwrap();
    writeln!(out, "  \"command\": \"{}\",", json_escape(input.command)).unwrap();
    writeln!(
        out,
        "  \"dataset\": \"{}\",",
        json_escape(&input.dataset.display().to_string())
    )
    .unwrap();
    writeln!(out, "  \"seed\": {},", input.seed).unwrap();
    writeln!(
        out,
        "  \"error_domain\": \"{}\",",
        input.error_domain.name()
    )
    .unwrap();
    writeln!(out, "  \"reference\": {},", input.reference).unwrap();
    match input.throughput {
        Some(t) => writeln!(
            out,
            "  \"throughput\": {{\"cm_updates_per_sec\": {}, \"im_updates_per_sec\": {}}},",
            t.cm_updates_per_sec, t.im_updates_per_sec
        )
        .unwrap(),
        None => writeln!(out, "  \"throughput\": null,").unwrap(),
    }
    out.push_str("  \"records\": [\n");
    for (idx, (record, members)) in input.records.iter().zip(input.member_runs).enumerate() {
        write!(
            out,
            "    {{\"estimator\": \"{}\", \"A\": {}, \"B\": {}, \"repeat\": {}, \"seed\": {}, \
             \"upsilon\": {}, \"mult_error\": {}, \"runs\": [",
            record.estimator.name(),
            record.side,
            record.runs,
            record.repeat,
            record.seed,
            record.estimate,
            record.mult_error
        )
        .unwrap();
        match members {
            MemberRuns::Cm(runs) => {
                for (k, run) in runs.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write!(
                        out,
                        "{{\"seed\": {}, \"h1\": {{\"a\": {}, \"b\": {}, \"p\": {}, \"A\": {}}}, \
                         \"h2\": {{\"a\": {}, \"b\": {}, \"p\": {}, \"A\": {}}}}}",
                        run.seed,
                        run.row_hash.a,
                        run.row_hash.b,
                        run.row_hash.p,
                        run.row_hash.buckets,
                        run.col_hash.a,
                        run.col_hash.b,
                        run.col_hash.p,
                        run.col_hash.buckets
                    )
                    .unwrap();
                }
            }
            MemberRuns::Im(runs) => {
                for (k, run) in runs.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write!(
                        out,
                        "{{\"seed\": {}, \"x\": {{\"h0\": {}, \"h1\": {}, \"h2\": {}, \"h3\": {}, \
                         \"p\": {}}}, \"y\": {{\"h0\": {}, \"h1\": {}, \"h2\": {}, \"h3\": {}, \"p\": {}}}}}",
                        run.seed,
                        run.row_sign.h0,
                        run.row_sign.h1,
                        run.row_sign.h2,
                        run.row_sign.h3,
                        run.row_sign.p,
                        run.col_sign.h0,
                        run.col_sign.h1,
                        run.col_sign.h2,
                        run.col_sign.h3,
                        run.col_sign.p
                    )
                    .unwrap();
                }
            }
        }
        out.push_str("]}");
        if idx + 1 < input.records.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_file, Dependence, DistributionSpec, Shape};

    fn small_dataset(dir: &Path) -> PathBuf {
        let path = dir.join("small.txt");
        let spec = DistributionSpec {
            n: 32,
            dependence: Dependence::Dependent,
            shape: Shape::Zipfian,
            seed: 5,
        };
        generate_file(&path, &spec, 2_000, false).unwrap();
        path
    }

    #[test]
    fn mult_error_examples() {
        assert_eq!(mult_error(0.25, 0.25).unwrap(), 0.0);
        assert!((mult_error(0.275, 0.25).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            mult_error(1.0, 0.0),
            Err(Error::UndefinedReference(_))
        ));
        assert!(mult_error(1.0, -0.5).is_err());
    }

    #[test]
    fn grid_pivot_is_the_mean_of_raw_records() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset, 42);
        cfg.side_values = vec![2, 4];
        cfg.run_values = vec![1, 4];
        cfg.repeats = 3;
        let output = run_grid(&cfg).unwrap();
        assert_eq!(output.records.len(), 2 * 2 * 3);
        assert_eq!(output.pivot.len(), 4);
        for cell in &output.pivot {
            let errs: Vec<f64> = output
                .records
                .iter()
                .filter(|r| r.side == cell.side && r.runs == cell.runs)
                .map(|r| r.mult_error)
                .collect();
            assert_eq!(errs.len(), 3);
            let mean = errs.iter().sum::<f64>() / 3.0;
            assert!((cell.mean_mult_error - mean).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_records_replay_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset.clone(), 3);
        cfg.side_values = vec![4];
        cfg.run_values = vec![2];
        cfg.repeats = 2;
        let output = run_grid(&cfg).unwrap();
        for record in &output.records {
            let ensemble = EnsembleConfig {
                side: record.side,
                runs: record.runs,
                aggregator: Aggregator::Median,
                seed: record.seed,
            };
            let replay = ensemble.run(open_stream(&dataset).unwrap()).unwrap();
            let replay_estimate = ErrorDomain::Squared.apply(replay.estimate);
            assert_eq!(replay_estimate, record.estimate, "record {:?}", record.seed);
        }
    }

    #[test]
    fn manifest_hash_parameters_replay_each_member_exactly() {
        // The integer hash coefficients recorded per ensemble member must
        // reproduce that member's estimate without going through the RNG.
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset.clone(), 21);
        cfg.side_values = vec![4];
        cfg.run_values = vec![3];
        cfg.repeats = 1;
        let output = run_grid(&cfg).unwrap();
        let MemberRuns::Cm(members) = &output.member_runs[0] else {
            panic!("grid records are counter-matrix runs")
        };
        assert_eq!(members.len(), 3);
        for member in members {
            let mut sketch = CounterMatrix::with_hashes(member.row_hash, member.col_hash);
            for pair in open_stream(&dataset).unwrap() {
                sketch.update(pair.unwrap()).unwrap();
            }
            let estimate = sketch.estimate().unwrap();
            assert_eq!(estimate.corrected_l2sq, member.estimate.corrected_l2sq);
            assert_eq!(estimate.raw_l2sq, member.estimate.raw_l2sq);
        }
    }

    #[test]
    fn grid_runs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset, 8);
        cfg.side_values = vec![2, 8];
        cfg.run_values = vec![1, 4];
        cfg.repeats = 1;
        let a = run_grid(&cfg).unwrap();
        let b = run_grid(&cfg).unwrap();
        assert_eq!(grid_raw_csv(&a.records), grid_raw_csv(&b.records));
        assert_eq!(grid_pivot_csv(&a.pivot), grid_pivot_csv(&b.pivot));
    }

    #[test]
    fn comparison_emits_one_row_per_side_value() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = CompareConfig::new(dataset, 17);
        cfg.side_values = vec![2, 4];
        cfg.repeats = 2;
        let output = run_comparison(&cfg).unwrap();
        assert_eq!(output.rows.len(), 2);
        assert_eq!(output.records.len(), 2 * 2 * 2);
        let csv = compare_csv(&output.rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("A,cm_mean_error,im_mean_error\n"));

        // Row means equal the mean of the matching raw records.
        for row in &output.rows {
            let cm: Vec<f64> = output
                .records
                .iter()
                .filter(|r| r.side == row.side && r.estimator == EstimatorKind::CounterMatrix)
                .map(|r| r.mult_error)
                .collect();
            let mean = cm.iter().sum::<f64>() / cm.len() as f64;
            assert!((row.cm_mean_error - mean).abs() < 1e-15);
        }
    }

    #[test]
    fn error_domain_norm_takes_square_roots() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset, 12);
        cfg.side_values = vec![4];
        cfg.run_values = vec![1];
        cfg.repeats = 1;
        cfg.error_domain = ErrorDomain::Norm;
        let norm_out = run_grid(&cfg).unwrap();
        cfg.error_domain = ErrorDomain::Squared;
        let sq_out = run_grid(&cfg).unwrap();
        let norm_rec = &norm_out.records[0];
        let sq_rec = &sq_out.records[0];
        assert_eq!(norm_rec.estimate, sq_rec.estimate.sqrt());
        assert_eq!(norm_rec.reference, sq_rec.reference.sqrt());
    }

    #[test]
    fn precomputed_reference_skips_the_oracle_pass() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let reference = compute_reference(&dataset).unwrap();
        let mut cfg = GridConfig::new(dataset, 4);
        cfg.side_values = vec![2];
        cfg.run_values = vec![1];
        cfg.repeats = 1;
        cfg.reference = Some(reference);
        let with_ref = run_grid(&cfg).unwrap();
        cfg.reference = None;
        let without = run_grid(&cfg).unwrap();
        assert_eq!(
            grid_raw_csv(&with_ref.records),
            grid_raw_csv(&without.records)
        );
    }

    #[test]
    fn zero_reference_is_rejected_with_the_value_attached() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = small_dataset(dir.path());
        let mut cfg = GridConfig::new(dataset, 4);
        cfg.reference = Some(0.0);
        match run_grid(&cfg) {
            Err(Error::UndefinedReference(v)) => assert_eq!(v, 0.0),
            other => panic!("expected UndefinedReference, got {other:?}"),
        }
    }

    #[test]
    fn throughput_measurement_returns_positive_rates() {
        let t = measure_throughput(32, 1_000, 200_000, 9).unwrap();
        assert!(t.cm_updates_per_sec > 0.0);
        assert!(t.im_updates_per_sec > 0.0);
    }
}
