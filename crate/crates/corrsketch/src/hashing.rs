//! The two hash families behind the sketches: affine bucket hashes
//! `x -> ((a*x + b) mod p) mod A` for the counter matrix, and degree-3
//! polynomial sign hashes `x -> ((h3*x^3 + h2*x^2 + h1*x + h0) mod p mod 2)*2 - 1`
//! for the sign sketch.
//!
//! Both families use the fixed Mersenne prime `p = 2^31 - 1`. Coefficients
//! are drawn uniformly from `[0, p)`, so all randomness lives in the
//! coefficients and every intermediate product of two residues fits in 64
//! bits. Inputs are 0-based symbol indices and must be below `p`, which the
//! stream layer's alphabet cap guarantees.

use crate::error::{Error, Result};
use crate::rng::Rng64;

/// Fixed modulus for both hash families: the Mersenne prime 2^31 - 1.
pub const HASH_PRIME: u64 = (1 << 31) - 1;

/// Affine bucket hash `[0, p) -> [0, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniversalHash {
    pub a: u64,
    pub b: u64,
    pub p: u64,
    pub buckets: u32,
}

impl UniversalHash {
    /// Draw coefficients uniformly from `[0, p)`. `a = 0` is allowed: the
    /// constant hash it yields occurs with probability 1/p, matching a
    /// uniform draw over the full family.
    pub fn random(buckets: u32, rng: &mut impl Rng64) -> Result<Self> {
        if buckets < 2 {
            return Err(Error::InvalidParameter(format!(
                "bucket count must be at least 2, got {buckets}"
            )));
        }
        let a = rng.next_below(HASH_PRIME);
        let b = rng.next_below(HASH_PRIME);
        Ok(Self {
            a,
            b,
            p: HASH_PRIME,
            buckets,
        })
    }

    /// The identity-like hash `a = 1, b = 0`; maps `x` to itself whenever
    /// `x < buckets`. Test and debug aid for oracle-equality checks.
    pub fn identity(buckets: u32) -> Self {
        Self {
            a: 1,
            b: 0,
            p: HASH_PRIME,
            buckets,
        }
    }

    /// Bucket of a 0-based symbol `x < p`.
    #[inline]
    pub fn bucket(&self, x: u64) -> u32 {
        debug_assert!(x < self.p);
        (((self.a * x + self.b) % self.p) % self.buckets as u64) as u32
    }
}

/// Degree-3 polynomial sign hash `[0, p) -> {-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourWiseSign {
    pub h0: u64,
    pub h1: u64,
    pub h2: u64,
    pub h3: u64,
    pub p: u64,
}

impl FourWiseSign {
    /// Draw the four coefficients uniformly from `[0, p)`, in index order.
    pub fn random(rng: &mut impl Rng64) -> Self {
        Self {
            h0: rng.next_below(HASH_PRIME),
            h1: rng.next_below(HASH_PRIME),
            h2: rng.next_below(HASH_PRIME),
            h3: rng.next_below(HASH_PRIME),
            p: HASH_PRIME,
        }
    }

    /// Sign of a 0-based symbol `x < p`: the cubic is evaluated by Horner's
    /// rule with a reduction after every step, then an even residue maps to
    /// -1 and an odd residue to +1.
    #[inline]
    pub fn sign(&self, x: u64) -> i64 {
        debug_assert!(x < self.p);
        let mut acc = self.h3;
        acc = (acc * x + self.h2) % self.p;
        acc = (acc * x + self.h1) % self.p;
        acc = (acc * x + self.h0) % self.p;
        ((acc % 2) as i64) * 2 - 1
    }
}
