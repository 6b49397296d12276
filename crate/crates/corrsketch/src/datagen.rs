//! Seeded generators for the four benchmark dataset families
//! (random/zipfian shape, independent/dependent pairing) and the stream
//! sampler that turns a materialized distribution into pair files.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exact::ExactTable;
use crate::numeric::CompensatedSum;
use crate::rng::{stream_seed, Rng64, Xoshiro256PlusPlus};
use crate::stream::{self, SamplePair, StreamHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    Dependent,
}

impl Dependence {
    pub fn name(&self) -> &'static str {
        match self {
            Dependence::Independent => "independent",
            Dependence::Dependent => "dependent",
        }
    }
}

impl std::str::FromStr for Dependence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Dependence::Independent),
            "dependent" => Ok(Dependence::Dependent),
            other => Err(Error::InvalidParameter(format!(
                "unknown dependence `{other}`, expected `independent` or `dependent`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Random,
    Zipfian,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Random => "random",
            Shape::Zipfian => "zipfian",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Shape::Random),
            "zipfian" => Ok(Shape::Zipfian),
            other => Err(Error::InvalidParameter(format!(
                "unknown shape `{other}`, expected `random` or `zipfian`"
            ))),
        }
    }
}

/// Recipe for a distribution over pairs.
#[derive(Debug, Clone, Copy)]
pub struct DistributionSpec {
    pub n: u32,
    pub dependence: Dependence,
    pub shape: Shape,
    pub seed: u64,
}

/// Concrete probabilities built from a [`DistributionSpec`]: two marginal
/// arrays for the independent case, a row-major n-by-n joint matrix for the
/// dependent case.
#[derive(Debug, Clone)]
pub enum MaterializedDistribution {
    Independent { n: u32, p: Vec<f64>, q: Vec<f64> },
    Dependent { n: u32, joint: Vec<f64> },
}

impl MaterializedDistribution {
    pub fn n(&self) -> u32 {
        match self {
            MaterializedDistribution::Independent { n, .. } => *n,
            MaterializedDistribution::Dependent { n, .. } => *n,
        }
    }
}

/// Uniform(0,1) draws, one per entry in index order, then normalization.
fn random_simplex(len: usize, rng: &mut impl Rng64) -> Vec<f64> {
    let mut weights: Vec<f64> = (0..len).map(|_| rng.next_f64()).collect();
    normalize(&mut weights);
    weights
}

/// Weights 1/k over ranks k = 1..=len, normalized by the harmonic sum, then
/// assigned to positions by a seeded in-place shuffle (skipped when
/// `identity_perm` is set, leaving rank k at index k-1).
fn zipfian_simplex(len: usize, rng: &mut impl Rng64, identity_perm: bool) -> Vec<f64> {
    let mut weights: Vec<f64> = (1..=len).map(|k| 1.0 / k as f64).collect();
    normalize(&mut weights);
    if !identity_perm {
        shuffle(&mut weights, rng);
    }
    weights
}

fn normalize(weights: &mut [f64]) {
    let mut sum = CompensatedSum::new();
    for &w in weights.iter() {
        sum.add(w);
    }
    let total = sum.value();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

fn shuffle<T>(values: &mut [T], rng: &mut impl Rng64) {
    for i in (1..values.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
}

/// Build the probability arrays for a spec. `identity_perm` pins the
/// zipfian rank-to-position assignment to symbol order instead of a random
/// permutation; hash-based consumers should not see sorted structure by
/// default.
pub fn materialize_with(
    spec: &DistributionSpec,
    identity_perm: bool,
) -> Result<MaterializedDistribution> {
    if spec.n < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet size must be at least 2, got {}",
            spec.n
        )));
    }
    let n = spec.n as usize;
    let mut rng = Xoshiro256PlusPlus::new(spec.seed);
    let built = match (spec.dependence, spec.shape) {
        (Dependence::Independent, Shape::Random) => {
            let p = random_simplex(n, &mut rng);
            let q = random_simplex(n, &mut rng);
            MaterializedDistribution::Independent { n: spec.n, p, q }
        }
        (Dependence::Independent, Shape::Zipfian) => {
            let p = zipfian_simplex(n, &mut rng, identity_perm);
            let q = zipfian_simplex(n, &mut rng, identity_perm);
            MaterializedDistribution::Independent { n: spec.n, p, q }
        }
        (Dependence::Dependent, Shape::Random) => {
            let joint = random_simplex(n * n, &mut rng);
            MaterializedDistribution::Dependent { n: spec.n, joint }
        }
        (Dependence::Dependent, Shape::Zipfian) => {
            let joint = zipfian_simplex(n * n, &mut rng, identity_perm);
            MaterializedDistribution::Dependent { n: spec.n, joint }
        }
    };
    Ok(built)
}

pub fn materialize(spec: &DistributionSpec) -> Result<MaterializedDistribution> {
    materialize_with(spec, false)
}

/// Cumulative array prepared for inverse-CDF sampling by binary search.
struct CdfSampler {
    cumulative: Vec<f64>,
}

impl CdfSampler {
    fn new(probabilities: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut running = 0.0f64;
        for &p in probabilities {
            running += p;
            cumulative.push(running);
        }
        Self { cumulative }
    }

    #[inline]
    fn draw(&self, rng: &mut impl Rng64) -> usize {
        let u = rng.next_f64();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1)
    }
}

/// Sample `len` pairs from a materialized distribution. Independent case:
/// one uniform draw for the first coordinate, then one for the second, per
/// pair. Dependent case: one draw over the n^2 cells, mapped row-major to a
/// pair. Byte-identical output for identical `(dist, len, seed)`.
pub fn sample_stream(dist: &MaterializedDistribution, len: u64, seed: u64) -> Vec<SamplePair> {
    let mut rng = Xoshiro256PlusPlus::new(seed);
    let mut pairs = Vec::with_capacity(len as usize);
    match dist {
        MaterializedDistribution::Independent { p, q, .. } => {
            let row = CdfSampler::new(p);
            let col = CdfSampler::new(q);
            for _ in 0..len {
                let i = row.draw(&mut rng) as u32 + 1;
                let j = col.draw(&mut rng) as u32 + 1;
                pairs.push(SamplePair::new(i, j));
            }
        }
        MaterializedDistribution::Dependent { n, joint } => {
            let cells = CdfSampler::new(joint);
            let n = *n;
            for _ in 0..len {
                let cell = cells.draw(&mut rng) as u64;
                let i = (cell / n as u64) as u32 + 1;
                let j = (cell % n as u64) as u32 + 1;
                pairs.push(SamplePair::new(i, j));
            }
        }
    }
    pairs
}

/// Generate a stream file for a spec: materialize, sample, write.
pub fn generate_file(
    path: &Path,
    spec: &DistributionSpec,
    len: u64,
    identity_perm: bool,
) -> Result<()> {
    let dist = materialize_with(spec, identity_perm)?;
    // Distribution build and pair sampling consume separate generators
    // derived from the same seed, so each stage replays independently.
    let pairs = sample_stream(&dist, len, stream_seed(spec.seed, 1));
    let header = StreamHeader::new(spec.n, Some(len))?;
    stream::write_stream(path, header, pairs)
}

/// Experiment sizes: the benchmark datasets from the source experiments and
/// a reduced size that reproduces their qualitative behavior in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// n = 10^4 symbols, 10^6 pairs.
    Full,
    /// n = 10^3 symbols, 10^5 pairs.
    Desk,
}

impl Scale {
    pub fn dimensions(&self) -> (u32, u64) {
        match self {
            Scale::Full => (10_000, 1_000_000),
            Scale::Desk => (1_000, 100_000),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scale::Full => "full",
            Scale::Desk => "desk",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::InvalidParameter(format!(
                "unknown scale `{other}`, expected `full` or `desk`"
            ))),
        }
    }
}

/// Manifest row for one generated dataset.
#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub name: String,
    pub path: PathBuf,
    pub shape: Shape,
    pub dependence: Dependence,
    pub n: u32,
    pub len: u64,
    pub seed: u64,
    pub l1: f64,
    pub l2: f64,
    pub l2_squared: f64,
}

/// The four dataset files (shape x dependence) plus `manifest.csv` recording
/// the exact oracle's distances for each, usable later as benchmark
/// references without re-running the oracle.
pub fn make_benchmark_datasets(
    out_dir: &Path,
    scale: Scale,
    seed: u64,
) -> Result<Vec<DatasetRecord>> {
    let (n, len) = scale.dimensions();
    std::fs::create_dir_all(out_dir)?;
    let combos = [
        (Shape::Random, Dependence::Independent),
        (Shape::Random, Dependence::Dependent),
        (Shape::Zipfian, Dependence::Independent),
        (Shape::Zipfian, Dependence::Dependent),
    ];
    let mut records = Vec::with_capacity(combos.len());
    for (index, (shape, dependence)) in combos.into_iter().enumerate() {
        let name = format!("{}_{}", shape.name(), dependence.name());
        let path = out_dir.join(format!("{name}.txt"));
        let spec = DistributionSpec {
            n,
            dependence,
            shape,
            seed: stream_seed(seed, index as u64),
        };
        generate_file(&path, &spec, len, false)?;

        let mut table = ExactTable::new(n)?;
        table.ingest_all(stream::open_stream(&path)?)?;
        let l1 = table.l1_diff()?;
        let (l2_squared, l2) = table.l2_diff()?;
        records.push(DatasetRecord {
            name,
            path,
            shape,
            dependence,
            n,
            len,
            seed: spec.seed,
            l1,
            l2,
            l2_squared,
        });
    }

    let manifest = out_dir.join("manifest.csv");
    let mut text = String::from("dataset,shape,dependence,n,N,seed,l1,l2,l2_squared\n");
    for r in &records {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.shape.name(),
            r.dependence.name(),
            r.n,
            r.len,
            r.seed,
            r.l1,
            r.l2,
            r.l2_squared
        ));
    }
    std::fs::write(manifest, text)?;
    Ok(records)
}
