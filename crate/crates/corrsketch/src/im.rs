//! Sign sketch baseline: three signed accumulators driven by two
//! independent 4-wise sign hashes.
//!
//! For sign functions `x(.)` and `y(.)` over the two coordinates, the
//! sketch maintains `sum x(i)y(j)`, `sum x(i)` and `sum y(j)` over the
//! stream. The combination `t = cross/N - row*col/N^2` equals the
//! sign-weighted sum of the oracle's per-cell differences, and `t^2` is an
//! unbiased estimate of the squared l2 difference with variance at most
//! three times its square. Accumulators stay exact integers; floating point
//! enters only at estimate time.

use crate::cm::Aggregator;
use crate::error::{Error, Result};
use crate::hashing::{FourWiseSign, HASH_PRIME};
use crate::rng::{child_seed, Rng64, Xoshiro256PlusPlus};
use crate::stream::{SamplePair, StreamSource};

/// Sign-sketch state: two hash descriptors and three exact accumulators.
#[derive(Debug, Clone)]
pub struct SignSketch {
    row_sign: FourWiseSign,
    col_sign: FourWiseSign,
    cross_sum: i64,
    row_sum: i64,
    col_sum: i64,
    total: u64,
}

/// Output of [`SignSketch::estimate`].
#[derive(Debug, Clone, Copy)]
pub struct ImEstimate {
    /// Estimate of the squared l2 difference: the square of `signed_sum`.
    pub l2sq: f64,
    /// The sign-weighted sum of joint-minus-product differences.
    pub signed_sum: f64,
}

impl SignSketch {
    /// Fresh sketch with two independent sign hashes (row hash first).
    pub fn new(rng: &mut impl Rng64) -> Self {
        let row_sign = FourWiseSign::random(rng);
        let col_sign = FourWiseSign::random(rng);
        Self::with_hashes(row_sign, col_sign)
    }

    pub fn with_hashes(row_sign: FourWiseSign, col_sign: FourWiseSign) -> Self {
        Self {
            row_sign,
            col_sign,
            cross_sum: 0,
            row_sum: 0,
            col_sum: 0,
            total: 0,
        }
    }

    pub fn hashes(&self) -> (FourWiseSign, FourWiseSign) {
        (self.row_sign, self.col_sign)
    }

    pub fn accumulators(&self) -> (i64, i64, i64) {
        (self.cross_sum, self.row_sum, self.col_sum)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn update(&mut self, pair: SamplePair) -> Result<()> {
        if pair.i < 1 || pair.j < 1 {
            return Err(Error::OutOfBounds {
                line: 0,
                symbol: pair.i.min(pair.j) as u64,
                n: 0,
            });
        }
        let x = (pair.i - 1) as u64;
        let y = (pair.j - 1) as u64;
        if x >= HASH_PRIME || y >= HASH_PRIME {
            return Err(Error::OutOfBounds {
                line: 0,
                symbol: x.max(y) + 1,
                n: 0,
            });
        }
        let sx = self.row_sign.sign(x);
        let sy = self.col_sign.sign(y);
        self.cross_sum += sx * sy;
        self.row_sum += sx;
        self.col_sum += sy;
        self.total += 1;
        Ok(())
    }

    /// Convert the integer accumulators to doubles and combine them. At
    /// `N = 1` the result is identically zero.
    pub fn estimate(&self) -> Result<ImEstimate> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let total = self.total as f64;
        let signed_sum = self.cross_sum as f64 / total
            - (self.row_sum as f64 * self.col_sum as f64) / (total * total);
        Ok(ImEstimate {
            l2sq: signed_sum * signed_sum,
            signed_sum,
        })
    }
}

/// Parameters of a copies-ensemble of sign sketches over one stream pass.
///
/// The mean is the default combination rule (per-copy variance is bounded by
/// three times the squared expectation, so averaging is variance-optimal);
/// the median is selectable.
#[derive(Debug, Clone, Copy)]
pub struct SignEnsembleConfig {
    pub copies: u32,
    pub aggregator: Aggregator,
    pub seed: u64,
}

/// One ensemble member's outcome, replayable from its derived seed.
#[derive(Debug, Clone, Copy)]
pub struct ImRun {
    pub seed: u64,
    pub row_sign: FourWiseSign,
    pub col_sign: FourWiseSign,
    pub estimate: ImEstimate,
}

#[derive(Debug, Clone)]
pub struct ImEnsembleResult {
    pub estimate: f64,
    pub runs: Vec<ImRun>,
}

impl SignEnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.copies < 1 {
            return Err(Error::InvalidParameter(
                "copy count must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Feed every pair to all copies in one pass; copy `k` draws its hashes
    /// from `child_seed(seed, k)`, the same splitting scheme the counter
    /// matrix ensemble uses.
    pub fn run(&self, src: StreamSource) -> Result<ImEnsembleResult> {
        self.validate()?;
        let mut seeds = Vec::with_capacity(self.copies as usize);
        let mut sketches = Vec::with_capacity(self.copies as usize);
        for k in 0..self.copies as u64 {
            let seed = child_seed(self.seed, k);
            seeds.push(seed);
            let mut rng = Xoshiro256PlusPlus::new(seed);
            sketches.push(SignSketch::new(&mut rng));
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
            let (row_sign, col_sign) = sketch.hashes();
            runs.push(ImRun {
                seed,
                row_sign,
                col_sign,
                estimate: sketch.estimate()?,
            });
        }
        let values: Vec<f64> = runs.iter().map(|r| r.estimate.l2sq).collect();
        Ok(ImEnsembleResult {
            estimate: self.aggregator.apply(&values),
            runs,
        })
    }
}

/// Sign function pair forcing given sign vectors over a 2-symbol alphabet;
/// used to enumerate all assignments in tests. `signs[k]` is the sign of
/// 0-based symbol `k`.
#[cfg(test)]
pub(crate) fn forced_signs_n2(signs: [i64; 2]) -> FourWiseSign {
    // f(0) = h0, f(1) = h0 + h1 (mod p mod 2); choose bits directly.
    let bit = |s: i64| u64::from(s > 0);
    let h0 = bit(signs[0]);
    let h1 = (bit(signs[1]) + 2 - h0) % 2;
    FourWiseSign {
        h0,
        h1,
        h2: 0,
        h3: 0,
        p: HASH_PRIME,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactTable;

    #[test]
    fn fresh_sketch_is_zeroed_and_deterministic() {
        let s = SignSketch::new(&mut Xoshiro256PlusPlus::new(1));
        assert_eq!(s.accumulators(), (0, 0, 0));
        assert_eq!(s.total(), 0);

        let a = SignSketch::new(&mut Xoshiro256PlusPlus::new(5));
        let b = SignSketch::new(&mut Xoshiro256PlusPlus::new(5));
        assert_eq!(a.hashes(), b.hashes());
    }

    #[test]
    fn row_and_col_hashes_are_independent_draws() {
        for seed in 0..10_000u64 {
            let s = SignSketch::new(&mut Xoshiro256PlusPlus::new(seed));
            let (hx, hy) = s.hashes();
            assert_ne!(hx, hy, "row and column hashes collided at seed {seed}");
        }
    }

    #[test]
    fn one_update_sets_unit_accumulators() {
        let mut s = SignSketch::new(&mut Xoshiro256PlusPlus::new(2));
        s.update(SamplePair::new(3, 8)).unwrap();
        let (cross, row, col) = s.accumulators();
        assert!(cross == 1 || cross == -1);
        assert!(row == 1 || row == -1);
        assert!(col == 1 || col == -1);
        assert_eq!(cross, row * col);
        assert_eq!(s.total(), 1);
    }

    #[test]
    fn forced_positive_signs_accumulate_ones() {
        let plus = forced_signs_n2([1, 1]);
        let mut s = SignSketch::with_hashes(plus, plus);
        s.update(SamplePair::new(1, 2)).unwrap();
        assert_eq!(s.accumulators(), (1, 1, 1));
    }

    #[test]
    fn repeated_updates_scale_accumulators() {
        let mut s = SignSketch::new(&mut Xoshiro256PlusPlus::new(4));
        s.update(SamplePair::new(5, 6)).unwrap();
        let base = s.accumulators();
        for _ in 0..6 {
            s.update(SamplePair::new(5, 6)).unwrap();
        }
        let scaled = s.accumulators();
        assert_eq!(scaled, (base.0 * 7, base.1 * 7, base.2 * 7));
    }

    #[test]
    fn accumulators_bounded_by_stream_length() {
        let mut s = SignSketch::new(&mut Xoshiro256PlusPlus::new(8));
        let mut n = 0i64;
        for k in 0..500u32 {
            s.update(SamplePair::new(k % 17 + 1, k % 23 + 1)).unwrap();
            n += 1;
            let (cross, row, col) = s.accumulators();
            assert!(cross.abs() <= n && row.abs() <= n && col.abs() <= n);
        }
    }

    #[test]
    fn single_pair_stream_estimates_zero() {
        for seed in 0..100u64 {
            let mut s = SignSketch::new(&mut Xoshiro256PlusPlus::new(seed));
            s.update(SamplePair::new(seed as u32 % 9 + 1, seed as u32 % 5 + 1))
                .unwrap();
            let e = s.estimate().unwrap();
            assert_eq!(e.l2sq, 0.0, "seed {seed}");
        }
    }

    #[test]
    fn hand_value_on_the_diagonal_stream() {
        // Signs x = [+1, -1], y = [+1, -1] over the stream [(1,1), (2,2)].
        let hx = forced_signs_n2([1, -1]);
        let hy = forced_signs_n2([1, -1]);
        let mut s = SignSketch::with_hashes(hx, hy);
        s.update(SamplePair::new(1, 1)).unwrap();
        s.update(SamplePair::new(2, 2)).unwrap();
        assert_eq!(s.accumulators(), (2, 0, 0));
        let e = s.estimate().unwrap();
        assert_eq!(e.signed_sum, 1.0);
        assert_eq!(e.l2sq, 1.0);
    }

    #[test]
    fn empty_sketch_errors() {
        let s = SignSketch::new(&mut Xoshiro256PlusPlus::new(0));
        assert!(matches!(s.estimate(), Err(Error::EmptyStream)));
    }

    #[test]
    fn exhaustive_sign_enumeration_matches_oracle_mean() {
        // All 16 sign assignments over two symbols per side, on [(1,1),(2,2)].
        let mut table = ExactTable::new(2).unwrap();
        table.ingest(SamplePair::new(1, 1)).unwrap();
        table.ingest(SamplePair::new(2, 2)).unwrap();
        let (l2sq, _) = table.l2_diff().unwrap();

        let mut sum = 0.0;
        let mut count = 0;
        for xs in [[1i64, 1], [1, -1], [-1, 1], [-1, -1]] {
            for ys in [[1i64, 1], [1, -1], [-1, 1], [-1, -1]] {
                let mut s = SignSketch::with_hashes(forced_signs_n2(xs), forced_signs_n2(ys));
                s.update(SamplePair::new(1, 1)).unwrap();
                s.update(SamplePair::new(2, 2)).unwrap();
                sum += s.estimate().unwrap().l2sq;
                count += 1;
            }
        }
        assert_eq!(count, 16);
        assert_eq!(sum / 16.0, l2sq);
        assert_eq!(l2sq, 0.25);
    }

    #[test]
    fn replicating_the_stream_preserves_the_estimate() {
        let mut once = SignSketch::new(&mut Xoshiro256PlusPlus::new(12));
        let mut thrice = once.clone();
        let base = [(1u32, 4u32), (2, 2), (3, 1), (4, 3), (2, 2)];
        for &(i, j) in &base {
            once.update(SamplePair::new(i, j)).unwrap();
        }
        for _ in 0..3 {
            for &(i, j) in &base {
                thrice.update(SamplePair::new(i, j)).unwrap();
            }
        }
        let a = once.estimate().unwrap();
        let b = thrice.estimate().unwrap();
        assert!((a.signed_sum - b.signed_sum).abs() < 1e-15);
    }

    #[test]
    fn exact_product_stream_estimates_zero_for_any_signs() {
        let u = [2u32, 1, 3];
        let v = [1u32, 2, 2];
        let mut stream = Vec::new();
        for (i, &ui) in u.iter().enumerate() {
            for (j, &vj) in v.iter().enumerate() {
                for _ in 0..ui * vj {
                    stream.push(SamplePair::new(i as u32 + 1, j as u32 + 1));
                }
            }
        }
        for seed in 0..100u64 {
            let mut s = SignSketch::new(&mut Xoshiro256PlusPlus::new(seed));
            for &p in &stream {
                s.update(p).unwrap();
            }
            let e = s.estimate().unwrap();
            assert!(e.signed_sum.abs() < 1e-12, "seed {seed}: {}", e.signed_sum);
        }
    }

    #[test]
    fn ensemble_single_copy_equals_direct_sketch() {
        let stream: Vec<SamplePair> = [(1u32, 2u32), (2, 1), (2, 2)]
            .iter()
            .map(|&(i, j)| SamplePair::new(i, j))
            .collect();
        let cfg = SignEnsembleConfig {
            copies: 1,
            aggregator: Aggregator::Mean,
            seed: 17,
        };
        let result = cfg
            .run(StreamSource::from_pairs(2, stream.clone()).unwrap())
            .unwrap();

        let mut solo = SignSketch::new(&mut Xoshiro256PlusPlus::new(child_seed(17, 0)));
        for &p in &stream {
            solo.update(p).unwrap();
        }
        assert_eq!(result.estimate, solo.estimate().unwrap().l2sq);
    }

    #[test]
    fn ensemble_mean_tracks_oracle_on_a_fixed_stream() {
        // Monte-Carlo check of the unbiasedness claim: the mean l2sq over
        // many independent sign draws approaches the oracle value, and the
        // spread obeys the three-times-squared-mean variance bound.
        let raw = [
            (1u32, 1u32),
            (1, 1),
            (1, 2),
            (2, 1),
            (2, 2),
            (2, 2),
            (2, 2),
            (3, 3),
            (3, 1),
            (1, 3),
            (4, 4),
            (4, 4),
            (1, 1),
            (2, 2),
            (3, 3),
            (4, 1),
        ];
        let stream: Vec<SamplePair> = raw.iter().map(|&(i, j)| SamplePair::new(i, j)).collect();
        let mut table = ExactTable::new(4).unwrap();
        for &p in &stream {
            table.ingest(p).unwrap();
        }
        let (l2sq, _) = table.l2_diff().unwrap();
        assert!(l2sq > 0.0);

        let copies = 10_000u32;
        let cfg = SignEnsembleConfig {
            copies,
            aggregator: Aggregator::Mean,
            seed: 2024,
        };
        let result = cfg
            .run(StreamSource::from_pairs(4, stream).unwrap())
            .unwrap();

        let values: Vec<f64> = result.runs.iter().map(|r| r.estimate.l2sq).collect();
        let mean = result.estimate;
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
        let se = (var / values.len() as f64).sqrt();
        assert!(
            (mean - l2sq).abs() <= 3.0 * se,
            "ensemble mean {mean} departs from oracle {l2sq} (se {se})"
        );
        assert!(
            var <= 1.1 * 3.0 * l2sq * l2sq,
            "variance {var} exceeds bound {}",
            1.1 * 3.0 * l2sq * l2sq
        );
    }
}
