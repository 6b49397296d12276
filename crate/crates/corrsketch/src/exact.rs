//! Exact ground truth from the full n-by-n pair-count table.
//!
//! The table stores every pair count plus row and column sums, so the
//! empirical joint `counts[i][j] / N` and the empirical marginals
//! `row_sums[i] / N`, `col_sums[j] / N` are available exactly. From the
//! per-cell differences `joint - product of marginals` it reports the l1
//! and l2 distances and the Pearson chi-squared independence statistic.
//! Memory is O(n^2) by design; sketches exist to avoid this cost, and every
//! sketch test in the repo measures against this oracle.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::stream::SamplePair;

/// Default cap on the alphabet size; a 20000-symbol table is 3.2 GB, which
/// is the most we let the oracle allocate without an explicit override.
pub const DEFAULT_ALPHABET_CAP: u32 = 20_000;

/// Dense n-by-n count table with maintained row/column sums.
#[derive(Debug, Clone)]
pub struct ExactTable {
    n: u32,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

/// All exact estimates derived from a table.
#[derive(Debug, Clone)]
pub struct ExactReport {
    pub p_hat: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
    pub l2_squared: f64,
    pub chi2: f64,
    pub dof: u64,
}

impl ExactTable {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_cap(n, DEFAULT_ALPHABET_CAP)
    }

    /// Build a table with an explicit alphabet cap for callers that accept
    /// the memory cost.
    pub fn with_cap(n: u32, cap: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size must be at least 2, got {n}"
            )));
        }
        if n > cap {
            return Err(Error::TableTooLarge { n, cap });
        }
        let side = n as usize;
        Ok(Self {
            n,
            counts: vec![0; side * side],
            row_sums: vec![0; side],
            col_sums: vec![0; side],
            total: 0,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n as usize + j]
    }

    #[inline]
    pub fn ingest(&mut self, pair: SamplePair) -> Result<()> {
        if !pair.in_bounds(self.n) {
            let symbol = if (1..=self.n).contains(&pair.i) {
                pair.j
            } else {
                pair.i
            };
            return Err(Error::OutOfBounds {
                line: 0,
                symbol: symbol as u64,
                n: self.n,
            });
        }
        let (i, j) = ((pair.i - 1) as usize, (pair.j - 1) as usize);
        self.counts[i * self.n as usize + j] += 1;
        self.row_sums[i] += 1;
        self.col_sums[j] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn ingest_all<I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = Result<SamplePair>>,
    {
        for pair in pairs {
            self.ingest(pair?)?;
        }
        Ok(())
    }

    /// Empirical marginals `(p_hat, q_hat)`.
    pub fn marginals(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let total = self.total as f64;
        let p_hat = self.row_sums.iter().map(|&r| r as f64 / total).collect();
        let q_hat = self.col_sums.iter().map(|&c| c as f64 / total).collect();
        Ok((p_hat, q_hat))
    }

    /// The n-by-n matrix of `joint - product` differences, row-major.
    pub fn delta_matrix(&self) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.n as usize;
        let total = self.total as f64;
        let mut delta = Vec::with_capacity(n * n);
        for i in 0..n {
            let p_i = self.row_sums[i] as f64 / total;
            for j in 0..n {
                let s_ij = self.counts[i * n + j] as f64 / total;
                let q_j = self.col_sums[j] as f64 / total;
                delta.push(s_ij - p_i * q_j);
            }
        }
        Ok(delta)
    }

    /// Sum of absolute differences; lies in [0, 2].
    pub fn l1_diff(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.n as usize;
        let total = self.total as f64;
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let p_i = self.row_sums[i] as f64 / total;
            for j in 0..n {
                let s_ij = self.counts[i * n + j] as f64 / total;
                let q_j = self.col_sums[j] as f64 / total;
                acc.add((s_ij - p_i * q_j).abs());
            }
        }
        Ok(acc.value())
    }

    /// Squared l2 difference and its square root.
    pub fn l2_diff(&self) -> Result<(f64, f64)> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.n as usize;
        let total = self.total as f64;
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let p_i = self.row_sums[i] as f64 / total;
            for j in 0..n {
                let s_ij = self.counts[i * n + j] as f64 / total;
                let q_j = self.col_sums[j] as f64 / total;
                let d = s_ij - p_i * q_j;
                acc.add(d * d);
            }
        }
        let l2_squared = acc.value();
        Ok((l2_squared, l2_squared.max(0.0).sqrt()))
    }

    /// Pearson chi-squared statistic `N * sum (s - pq)^2 / (pq)` with
    /// `(n-1)^2` degrees of freedom. Cells with a zero marginal product
    /// contribute nothing (their joint count is necessarily zero).
    pub fn chi_squared(&self) -> Result<(f64, u64)> {
        if self.total == 0 {
            return Err(Error::EmptyStream);
        }
        let n = self.n as usize;
        let total = self.total as f64;
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let p_i = self.row_sums[i] as f64 / total;
            if p_i == 0.0 {
                continue;
            }
            for j in 0..n {
                let q_j = self.col_sums[j] as f64 / total;
                let expected = p_i * q_j;
                if expected == 0.0 {
                    continue;
                }
                let s_ij = self.counts[i * n + j] as f64 / total;
                let d = s_ij - expected;
                acc.add(d * d / expected);
            }
        }
        let dof = (self.n as u64 - 1).pow(2);
        Ok((total * acc.value(), dof))
    }

    pub fn report(&self) -> Result<ExactReport> {
        let (p_hat, q_hat) = self.marginals()?;
        let l1 = self.l1_diff()?;
        let (l2_squared, l2) = self.l2_diff()?;
        let (chi2, dof) = self.chi_squared()?;
        Ok(ExactReport {
            p_hat,
            q_hat,
            l1,
            l2,
            l2_squared,
            chi2,
            dof,
        })
    }
}

/// Upper 5% chi-squared critical value via the Wilson-Hilferty cube
/// approximation. Only the 0.05 level is supported.
pub fn chi2_critical(dof: u64, alpha: f64) -> Result<f64> {
    if dof < 1 {
        return Err(Error::InvalidParameter("dof must be at least 1".into()));
    }
    if alpha != 0.05 {
        return Err(Error::InvalidParameter(format!(
            "only alpha = 0.05 is supported, got {alpha}"
        )));
    }
    const Z_95: f64 = 1.644_853_626_951_472_2;
    let k = dof as f64;
    let term = 1.0 - 2.0 / (9.0 * k) + Z_95 * (2.0 / (9.0 * k)).sqrt();
    Ok(k * term * term * term)
}
