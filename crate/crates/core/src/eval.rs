//! Clustering accuracy under the best label matching, and normalized
//! mutual information.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
}

/// Rows index predicted clusters, columns true classes, both relabeled
/// densely in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl Contingency {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        if pred.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let p = dense(pred);
        let t = dense(truth);
        let rows = p.iter().max().map_or(0, |m| m + 1);
        let cols = t.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0usize; cols]; rows];
        for (&a, &b) in p.iter().zip(&t) {
            counts[a][b] += 1;
        }
        Ok(Contingency { counts, n: pred.len() })
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }
}

fn dense(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Minimum-cost assignment of rows to columns of a square matrix
/// (shortest augmenting paths with potentials). Returns the column of
/// each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for col in 1..=n {
                if !used[col] {
                    let cur = cost[r - 1][col - 1] - u[r] - v[col];
                    if cur < minv[col] {
                        minv[col] = cur;
                        way[col] = col0;
                    }
                    if minv[col] < delta {
                        delta = minv[col];
                        col1 = col;
                    }
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Fraction of points whose cluster maps to their class under the
/// one-to-one matching that maximizes agreement.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    let size = table.rows().max(table.cols());
    let mut cost = vec![vec![0i64; size]; size];
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            cost[i][j] = -(c as i64);
        }
    }
    let matched: usize = min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < table.rows() && j < table.cols())
        .map(|(i, &j)| table.counts[i][j])
        .sum();
    Ok(matched as f64 / table.n as f64)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies
/// (natural log). Two single-cluster labelings score 1.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = Contingency::new(pred, truth)?;
    let n = table.n as f64;
    let row_sums: Vec<usize> = table.counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table.cols()).map(|j| table.counts.iter().map(|r| r[j]).sum()).collect();
    let h_pred = entropy(row_sums.iter().copied(), n);
    let h_truth = entropy(col_sums.iter().copied(), n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * libm::log(c * n / (row_sums[i] as f64 * col_sums[j] as f64));
            }
        }
    }
    let denom = (h_pred + h_truth) / 2.0;
    Ok((mi / denom).clamp(0.0, 1.0))
}

pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<MetricReport> {
    Ok(MetricReport {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
    })
}
