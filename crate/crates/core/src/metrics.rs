//! External clustering indices computed from a contingency table: purity,
//! adjusted Rand index, adjusted mutual information and Fowlkes-Mallows.
//!
//! Labels are plain integers; an outlier marker (`-1`) is just one more
//! predicted cluster.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GfdcError, Result};

/// Counts of samples per (predicted cluster, true class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new(pred: &[i64], truth: &[i64]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(GfdcError::LengthMismatch { left: pred.len(), right: truth.len() });
        }
        if pred.is_empty() {
            return Err(GfdcError::InvalidInput("empty labelings".into()));
        }
        let index = |labels: &[i64]| {
            let mut map = BTreeMap::new();
            for &l in labels {
                let next = map.len();
                map.entry(l).or_insert(next);
            }
            map
        };
        let (rows, cols) = (index(pred), index(truth));
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (p, t) in pred.iter().zip(truth) {
            counts[rows[p]][cols[t]] += 1;
        }
        Ok(ContingencyTable { counts, n: pred.len() as u64 })
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.counts.first().map_or(0, Vec::len)];
        for row in &self.counts {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flatten().copied()
    }
}

fn pairs(x: u64) -> u128 {
    let x = x as u128;
    x * x.saturating_sub(1) / 2
}

pub fn purity(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let hits: u64 = t.counts.iter().map(|r| r.iter().copied().max().unwrap_or(0)).sum();
    Ok(hits as f64 / t.n as f64)
}

/// Pair-counting adjusted Rand index. Two single-cluster labelings score 1.
pub fn ari(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    if t.n < 2 {
        return Err(GfdcError::InvalidInput("adjusted Rand index needs at least 2 samples".into()));
    }
    let index: u128 = t.cells().map(pairs).sum();
    let a: u128 = t.row_sums().into_iter().map(pairs).sum();
    let b: u128 = t.col_sums().into_iter().map(pairs).sum();
    let total = pairs(t.n) as f64;
    let expected = a as f64 * b as f64 / total;
    let max = (a + b) as f64 / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / (max - expected))
}

/// Fowlkes-Mallows index `TP / sqrt((TP + FP)(TP + FN))`; 0 when no pair is
/// co-clustered in either labeling.
pub fn fmi(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let tp: u128 = t.cells().map(pairs).sum();
    let pred_pairs: u128 = t.row_sums().into_iter().map(pairs).sum();
    let true_pairs: u128 = t.col_sums().into_iter().map(pairs).sum();
    if tp == 0 {
        return Ok(0.0);
    }
    Ok(tp as f64 / (pred_pairs as f64 * true_pairs as f64).sqrt())
}

/// Normalizer applied to the entropies in [`ami`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmiNormalization {
    #[default]
    Max,
    Arithmetic,
    Geometric,
    Min,
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let (rows, cols) = (t.row_sums(), t.col_sums());
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Expected mutual information under the hypergeometric model of random
/// labelings with the given marginals.
fn expected_mutual_information(rows: &[u64], cols: &[u64], n: u64) -> f64 {
    let mut ln_fact = vec![0.0f64; n as usize + 1];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in rows {
        for &b in cols {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            for nij in lo..=hi {
                let term = nij as f64 / nf * (nf * nij as f64 / (a as f64 * b as f64)).ln();
                let log_p =
                    ln_fact[a as usize] + ln_fact[b as usize] + ln_fact[(n - a) as usize] + ln_fact[(n - b) as usize]
                        - ln_fact[n as usize]
                        - ln_fact[nij as usize]
                        - ln_fact[(a - nij) as usize]
                        - ln_fact[(b - nij) as usize]
                        - ln_fact[(n + nij - a - b) as usize];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information, `(MI - E[MI]) / (norm(H_pred, H_true) - E[MI])`.
/// Identical labelings score 1; so do two trivial labelings (one cluster
/// each, or every sample alone in both).
pub fn ami_with(pred: &[i64], truth: &[i64], norm: AmiNormalization) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    let (r, s) = (t.counts.len(), t.counts[0].len());
    if (r == 1 && s == 1) || (r as u64 == t.n && s as u64 == t.n) {
        return Ok(1.0);
    }
    let n = t.n as f64;
    let (rows, cols) = (t.row_sums(), t.col_sums());
    let mi = mutual_information(&t);
    let emi = expected_mutual_information(&rows, &cols, t.n);
    let (hp, ht) = (entropy(&rows, n), entropy(&cols, n));
    let normalizer = match norm {
        AmiNormalization::Max => hp.max(ht),
        AmiNormalization::Arithmetic => (hp + ht) / 2.0,
        AmiNormalization::Geometric => (hp * ht).sqrt(),
        AmiNormalization::Min => hp.min(ht),
    };
    let mut denominator = normalizer - emi;
    let eps = f64::EPSILON;
    if denominator < 0.0 {
        denominator = denominator.min(-eps);
    } else {
        denominator = denominator.max(eps);
    }
    Ok((mi - emi) / denominator)
}

/// [`ami_with`] using the max-entropy normalizer.
pub fn ami(pred: &[i64], truth: &[i64]) -> Result<f64> {
    ami_with(pred, truth, AmiNormalization::Max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub purity: f64,
    pub ari: f64,
    pub ami: f64,
    pub fmi: f64,
}

pub fn score_all(pred: &[i64], truth: &[i64]) -> Result<Scores> {
    Ok(Scores { purity: purity(pred, truth)?, ari: ari(pred, truth)?, ami: ami(pred, truth)?, fmi: fmi(pred, truth)? })
}
