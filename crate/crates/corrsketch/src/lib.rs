//! Single-pass estimation of how far a stream of sample pairs is from
//! independence, measured as the l2 distance between the empirical joint
//! distribution and the product of its empirical marginals.
//!
//! Two sketches estimate that distance in small space over one pass:
//!
//! * [`CounterMatrix`] — an A-by-A counter grid indexed by two universal
//!   bucket hashes, whose bias-corrected squared-l2 statistic is an
//!   unbiased estimate of the exact one (see [`cm`]);
//! * [`SignSketch`] — the classic sign-projection baseline holding three
//!   signed accumulators per copy (see [`im`]).
//!
//! [`ExactTable`] keeps the full n-by-n count table and serves as the
//! ground-truth oracle for both, including the chi-squared independence
//! test. [`datagen`] builds the benchmark dataset families, and [`harness`]
//! reproduces the grid and equal-space experiments with deterministic CSV
//! and manifest outputs. All randomness flows from the seedable generators
//! in [`rng`], so every run is replayable bit-for-bit from its seed.
//!
//! Stream files use the `#corrstream` text format documented in [`stream`].

#![forbid(unsafe_code)]

pub mod cm;
pub mod datagen;
pub mod error;
pub mod exact;
pub mod harness;
pub mod hashing;
pub mod im;
pub mod numeric;
pub mod rng;
pub mod stream;

pub use cm::{Aggregator, CmEstimate, CounterMatrix, EnsembleConfig};
pub use error::{Error, Result};
pub use exact::{chi2_critical, ExactReport, ExactTable};
pub use hashing::{FourWiseSign, UniversalHash, HASH_PRIME};
pub use im::{ImEstimate, SignEnsembleConfig, SignSketch};
pub use stream::{open_stream, write_stream, SamplePair, StreamHeader, StreamSource};
