//! Counter-matrix sketch: a square grid of counters indexed by two
//! independent bucket hashes of the pair's coordinates.
//!
//! The grid compresses the full n-by-n count table by randomly summing rows
//! and columns together. Its squared l2 statistic, computed exactly like the
//! oracle's but on the compressed grid, underestimates the true value by a
//! factor `(1 - 1/A)^2` in expectation, where `A` is the side length;
//! dividing by that factor yields an unbiased estimate of the oracle's
//! squared l2 difference. An ensemble of independently hashed sketches
//! reduces the failure probability via the median (or the mean, which the
//! unbiasedness tests use).

use crate::error::{Error, Result};
use crate::hashing::{UniversalHash, HASH_PRIME};
use crate::numeric::{self, CompensatedSum};
use crate::rng::{child_seed, Rng64, Xoshiro256PlusPlus};
use crate::stream::{SamplePair, StreamSource};

/// How an ensemble combines its per-run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Median,
    Mean,
}

impl Aggregator {
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            Aggregator::Median => numeric::median(values),
            Aggregator::Mean => numeric::mean(values),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Aggregator::Median => "median",
            Aggregator::Mean => "mean",
        }
    }
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Aggregator::Median),
            "mean" => Ok(Aggregator::Mean),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregator `{other}`, expected `median` or `mean`"
            ))),
        }
    }
}

/// The sketch state: an `side x side` counter grid plus the two hashes.
#[derive(Debug, Clone)]
pub struct CounterMatrix {
    side: u32,
    row_hash: UniversalHash,
    col_hash: UniversalHash,
    cells: Vec<u64>,
    total: u64,
}

/// Output of [`CounterMatrix::estimate`].
#[derive(Debug, Clone, Copy)]
pub struct CmEstimate {
    /// Bias-corrected estimate of the oracle's squared l2 difference.
    pub corrected_l2sq: f64,
    /// The grid's own squared l2 statistic, before correction.
    pub raw_l2sq: f64,
    pub count: u64,
}

impl CounterMatrix {
    /// Fresh zeroed sketch with two independent hashes drawn from `rng`
    /// (row hash first).
    pub fn new(side: u32, rng: &mut impl Rng64) -> Result<Self> {
        let row_hash = UniversalHash::random(side, rng)?;
        let col_hash = UniversalHash::random(side, rng)?;
        Ok(Self::with_hashes(row_hash, col_hash))
    }

    /// Sketch with explicit hashes; both must target the same bucket count.
    pub fn with_hashes(row_hash: UniversalHash, col_hash: UniversalHash) -> Self {
        assert_eq!(
            row_hash.buckets, col_hash.buckets,
            "hash bucket counts differ"
        );
        let side = row_hash.buckets;
        Self {
            side,
            row_hash,
            col_hash,
            cells: vec![0; side as usize * side as usize],
            total: 0,
        }
    }

    /// Sketch whose hashes map symbol `x` to bucket `x mod side`; with
    /// `side >= n` this makes the grid a copy of the exact table.
    pub fn with_identity_hashes(side: u32) -> Self {
        Self::with_hashes(UniversalHash::identity(side), UniversalHash::identity(side))
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn hashes(&self) -> (UniversalHash, UniversalHash) {
        (self.row_hash, self.col_hash)
    }

    pub fn cell(&self, row: u32, col: u32) -> u64 {
        self.cells[row as usize * self.side as usize + col as usize]
    }

    /// Count one pair: two hash evaluations and one counter increment.
    #[inline]
    pub fn update(&mut self, pair: SamplePair) -> Result<()> {
        if pair.i < 1 || pair.j < 1 {
            return Err(Error::OutOfBounds {
                line: 0,
                symbol: pair.i.min(pair.j) as u64,
                n: self.side,
            });
        }
        let x = (pair.i - 1) as u64;
        let y = (pair.j - 1) as u64;
        if x >= HASH_PRIME || y >= HASH_PRIME {
            return Err(Error::OutOfBounds {
                line: 0,
                symbol: x.max(y) + 1,
                n: self.side,
            });
        }
        let row = self.row_hash.bucket(x) as usize;
        let col = self.col_hash.bucket(y) as usize;
        self.cells[row * self.side as usize + col] += 1;
        self.total += 1;
        Ok(())
    }

    /// Add another sketch's counts; requires identical hash functions.
    pub fn merge(&mut self, other: &CounterMatrix) -> Result<()> {
        if self.side != other.side
            || self.row_hash != other.row_hash
            || self.col_hash != other.col_hash
        {
            return Err(Error::IncompatibleSketches(
                "counter matrices must share side length and hash functions",
            ));
        }
        for (mine, theirs) in self.cells.iter_mut().zip(&other.cells) {
            *mine += theirs;
        }
        self.total += other.total;
        Ok(())
    }

    /// Squared-l2 statistic of the grid and its bias-corrected form.
    ///
    /// Row and column sums are recomputed here rather than maintained per
    /// update, keeping the update path at two memory touches. Read-only and
    /// repeatable.
    pub fn estimate(&self) -> Result<CmEstimate> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let side = self.side as usize;
        let mut row_sums = vec![0u64; side];
        let mut col_sums = vec![0u64; side];
        for (row, cells) in row_sums.iter_mut().zip(self.cells.chunks_exact(side)) {
            for (col, &v) in col_sums.iter_mut().zip(cells) {
                *row += v;
                *col += v;
            }
        }
        let total = self.total as f64;
        let mut acc = CompensatedSum::new();
        for (&row, cells) in row_sums.iter().zip(self.cells.chunks_exact(side)) {
            let row = row as f64;
            for (&col, &v) in col_sums.iter().zip(cells) {
                let joint = v as f64 / total;
                let product = row * col as f64 / (total * total);
                let d = joint - product;
                acc.add(d * d);
            }
        }
        let raw_l2sq = acc.value().max(0.0);
        let shrink = 1.0 - 1.0 / self.side as f64;
        Ok(CmEstimate {
            corrected_l2sq: raw_l2sq / (shrink * shrink),
            raw_l2sq,
            count: self.total,
        })
    }
}

/// Parameters of an ensemble of counter matrices over one stream pass.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleConfig {
    /// Side length of every sketch.
    pub side: u32,
    /// Number of independently hashed sketches.
    pub runs: u32,
    pub aggregator: Aggregator,
    pub seed: u64,
}

/// One ensemble member's outcome, replayable from its derived seed.
#[derive(Debug, Clone, Copy)]
pub struct CmRun {
    pub seed: u64,
    pub row_hash: UniversalHash,
    pub col_hash: UniversalHash,
    pub estimate: CmEstimate,
}

#[derive(Debug, Clone)]
pub struct CmEnsembleResult {
    /// Aggregated corrected estimate.
    pub estimate: f64,
    /// Aggregate of the uncorrected per-run statistics.
    pub raw_l2sq: f64,
    pub runs: Vec<CmRun>,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.side < 2 {
            return Err(Error::InvalidParameter(format!(
                "side length must be at least 2, got {}",
                self.side
            )));
        }
        if self.runs < 1 {
            return Err(Error::InvalidParameter(
                "run count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Run the ensemble over one pass of the stream: every pair is fed to
    /// all sketches, and run `b` draws its hashes from the derived seed
    /// `child_seed(seed, b)`, so any member is replayable in isolation.
    pub fn run(&self, src: StreamSource) -> Result<CmEnsembleResult> {
        self.run_inner(src, false)
    }

    /// Same pass but with identity hashes in every sketch; debug aid that
    /// makes the sketch agree with the oracle whenever `side >= n`.
    pub fn run_with_identity_hashes(&self, src: StreamSource) -> Result<CmEnsembleResult> {
        self.run_inner(src, true)
    }

    fn run_inner(&self, src: StreamSource, identity: bool) -> Result<CmEnsembleResult> {
        self.validate()?;
        let mut seeds = Vec::with_capacity(self.runs as usize);
        let mut sketches = Vec::with_capacity(self.runs as usize);
        for b in 0..self.runs as u64 {
            let seed = child_seed(self.seed, b);
            seeds.push(seed);
            if identity {
                sketches.push(CounterMatrix::with_identity_hashes(self.side));
            } else {
                let mut rng = Xoshiro256PlusPlus::new(seed);
                sketches.push(CounterMatrix::new(self.side, &mut rng)?);
            }
        }
        let mut saw_any = false;
        for pair in src {
            let pair = pair?;
            saw_any = true;
            for sketch in &mut sketches {
                sketch.update(pair)?;
            }
        }
        if !saw_any {
            return Err(Error::EmptyStream);
        }
        let mut runs = Vec::with_capacity(sketches.len());
        for (sketch, seed) in sketches.iter().zip(seeds) {
            let (row_hash, col_hash) = sketch.hashes();
            runs.push(CmRun {
                seed,
                row_hash,
                col_hash,
                estimate: sketch.estimate()?,
            });
        }
        let corrected: Vec<f64> = runs.iter().map(|r| r.estimate.corrected_l2sq).collect();
        let raw: Vec<f64> = runs.iter().map(|r| r.estimate.raw_l2sq).collect();
        Ok(CmEnsembleResult {
            estimate: self.aggregator.apply(&corrected),
            raw_l2sq: self.aggregator.apply(&raw),
            runs,
        })
    }
}

/// Sketch dimensions guaranteeing a `1 +- eps` estimate with probability
/// `1 - delta`: side `ceil(32 / eps^2)`, runs `ceil(32 * ln(2 / delta))`.
pub fn ensemble_params(eps: f64, delta: f64) -> Result<(u32, u32)> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be in (0, 1], got {eps}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    let side = (32.0 / (eps * eps)).ceil() as u32;
    let runs = (32.0 * (2.0 / delta).ln()).ceil() as u32;
    Ok((side, runs))
}
