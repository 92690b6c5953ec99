//! Normalized spectral clustering and its weighted constrained variant.
//!
//! The constrained variant solves `L v = lambda R_a v` with
//! `R_a = D^-1/2 R D^-1/2 + a I` and keeps eigenvectors with
//! `v' R_a v > 0`. A smooth vector is thus preferred when it also agrees
//! with the must-links (positive entries) and cannot-links (negative
//! entries), while `a` bounds how far the constraints can tilt it.
//!
//! `L` is only semidefinite and `R_a` may be indefinite for a small `a`, so
//! the pencil is reduced through the eigenbasis of `L`: null-space
//! directions give `lambda = 0` solutions, and the range part becomes an
//! ordinary symmetric problem on a Schur complement.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::kmeans::kmeans_points;
use super::ClusterAssignment;
use crate::corpus::{clamp_floor, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::weighting::WeightedConstraintMatrix;

pub const SPECTRAL_KMEANS_ITERS: usize = 300;

const NULL_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-6;
const ALPHA_RETRIES: usize = 5;
/// Default balance factor as a multiple of the spectral radius of the
/// normalized constraint matrix; any multiple above 1 keeps `R_a` positive
/// definite.
pub const DEFAULT_ALPHA_RATIO: f64 = 4.0;
/// Seeded K-Means++ runs on the spectral embedding; the lowest inertia wins.
pub const KMEANS_RESTARTS: u64 = 10;

/// Dense operators of the (constrained) spectral problem.
#[derive(Debug, Clone)]
pub struct SpectralOperators {
    pub affinity: DMatrix<f64>,
    pub degrees: Vec<f64>,
    pub laplacian: DMatrix<f64>,
    /// `D^-1/2 R D^-1/2`, before the balance shift.
    pub constraint: DMatrix<f64>,
    pub alpha: f64,
}

impl SpectralOperators {
    /// Affinity, degrees and normalized Laplacian; `constraint` is zero.
    pub fn unconstrained(emb: &EmbeddingMatrix) -> Self {
        let n = emb.rows();
        let x = DMatrix::from_row_slice(n, emb.dim(), emb.as_slice());
        let mut affinity = &x * x.transpose();
        for i in 0..n {
            for j in 0..n {
                if i == j || affinity[(i, j)] < 0.0 {
                    affinity[(i, j)] = 0.0;
                }
            }
        }
        let degrees: Vec<f64> = (0..n).map(|i| clamp_floor(affinity.row(i).sum())).collect();
        let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / libm::sqrt(*d)).collect();
        let mut laplacian = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let dij = if i == j { degrees[i] } else { 0.0 };
                laplacian[(i, j)] = (dij - affinity[(i, j)]) * inv_sqrt[i] * inv_sqrt[j];
            }
        }
        SpectralOperators {
            affinity,
            degrees,
            laplacian,
            constraint: DMatrix::zeros(n, n),
            alpha: 0.0,
        }
    }

    /// Adds the normalized constraint matrix. `alpha = None` picks
    /// [`DEFAULT_ALPHA_RATIO`] times the largest eigenvalue magnitude of
    /// `D^-1/2 R D^-1/2`.
    pub fn build(emb: &EmbeddingMatrix, r: &WeightedConstraintMatrix, alpha: Option<f64>) -> Result<Self> {
        if r.dim() != emb.rows() {
            return Err(Error::LengthMismatch {
                left: r.dim(),
                right: emb.rows(),
            });
        }
        let mut ops = Self::unconstrained(emb);
        for e in r.entries() {
            let v = e.signed() / libm::sqrt(ops.degrees[e.a] * ops.degrees[e.b]);
            ops.constraint[(e.a, e.b)] = v;
            ops.constraint[(e.b, e.a)] = v;
        }
        ops.alpha = match alpha {
            Some(a) if a > 0.0 && a.is_finite() => a,
            Some(a) => return Err(Error::InvalidParameter(alloc::format!("balance factor must be positive, got {a}"))),
            None => {
                let eig = eigen(ops.constraint.clone(), "normalized constraint matrix")?;
                DEFAULT_ALPHA_RATIO * eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        };
        Ok(ops)
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// `D^-1/2 R D^-1/2 + alpha I`.
    pub fn shifted_constraint(&self) -> DMatrix<f64> {
        &self.constraint + DMatrix::identity(self.n(), self.n()) * self.alpha
    }
}

/// Diagnostics of a constrained spectral run.
#[derive(Debug, Clone, PartialEq)]
pub struct WcscReport {
    /// Balance factor of the accepted solve, if any.
    pub alpha: Option<f64>,
    /// Times the balance factor was doubled to reach `k` feasible vectors.
    pub doublings: usize,
    pub fell_back: bool,
    /// Generalized eigenvalues of the retained vectors, ascending.
    pub eigenvalues: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcscOptions {
    /// Explicit balance factor; `None` uses the data-driven default.
    pub alpha: Option<f64>,
    pub kmeans_iters: usize,
}

impl Default for WcscOptions {
    fn default() -> Self {
        WcscOptions {
            alpha: None,
            kmeans_iters: SPECTRAL_KMEANS_ITERS,
        }
    }
}

fn eigen(m: DMatrix<f64>, what: &str) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let fail = || Error::Numerical(alloc::format!("symmetric eigensolver failed on the {n}x{n} {what}"));
    let finite = |e: &SymmetricEigen<f64, nalgebra::Dyn>| {
        e.eigenvalues.iter().chain(e.eigenvectors.iter()).all(|v| v.is_finite())
    };
    if let Some(e) = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0) {
        if finite(&e) {
            return Ok(e);
        }
    }
    // The QR sweep occasionally yields NaN vectors on nearly diagonal
    // input; a dense reflection H M H breaks that structure and H maps
    // the vectors back.
    for attempt in 1..=3u32 {
        let mut w = DVector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * (attempt as f64 * 0.618_033_988_75)).fract());
        w.normalize_mut();
        let h = DMatrix::identity(n, n) - (&w * w.transpose()) * 2.0;
        let reflected = &h * &m * &h;
        let reflected = (&reflected + reflected.transpose()) * 0.5;
        if let Some(mut e) = SymmetricEigen::try_new(reflected, f64::EPSILON, 0) {
            if finite(&e) {
                e.eigenvectors = &h * e.eigenvectors;
                return Ok(e);
            }
        }
    }
    Err(fail())
}

/// Eigenpairs sorted by ascending eigenvalue, ties by original index.
fn sorted(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    order
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    Ok(())
}

/// Row-normalizes an `n x k` embedding and clusters its rows, keeping the
/// best of [`KMEANS_RESTARTS`] seeded runs.
fn cluster_rows(mut v: DMatrix<f64>, k: usize, seed: u64, iters: usize) -> Result<ClusterAssignment> {
    let (n, cols) = v.shape();
    for i in 0..n {
        let norm = v.row(i).norm();
        if norm > 0.0 {
            v.row_mut(i).unscale_mut(norm);
        }
    }
    let mut data = Vec::with_capacity(n * cols);
    for i in 0..n {
        data.extend(v.row(i).iter());
    }
    let mut best: Option<ClusterAssignment> = None;
    for restart in 0..KMEANS_RESTARTS {
        let run = kmeans_points(&data, cols, k, restart_seed(seed, restart), iters)?;
        let better = match &best {
            None => true,
            Some(b) => run.objective_trace.last() < b.objective_trace.last(),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn restart_seed(seed: u64, restart: u64) -> u64 {
    if restart == 0 {
        return seed;
    }
    let mut z = seed ^ restart.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bottom-`k` eigenvectors of the normalized Laplacian, row-normalized,
/// then K-Means++.
pub fn spectral_baseline(emb: &EmbeddingMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    spectral_with_iters(emb, k, seed, SPECTRAL_KMEANS_ITERS)
}

pub fn spectral_with_iters(emb: &EmbeddingMatrix, k: usize, seed: u64, iters: usize) -> Result<ClusterAssignment> {
    check_k(emb.rows(), k)?;
    let ops = SpectralOperators::unconstrained(emb);
    let eig = eigen(ops.laplacian, "normalized Laplacian")?;
    let order = sorted(&eig);
    let v = DMatrix::from_fn(emb.rows(), k, |i, c| eig.eigenvectors[(i, order[c])]);
    cluster_rows(v, k, seed, iters)
}

/// Weighted constrained spectral clustering.
///
/// Empty constraints, or no balance factor yielding `k` feasible
/// eigenvectors, fall back to [`spectral_baseline`].
pub fn wcsc(
    emb: &EmbeddingMatrix,
    k: usize,
    r: &WeightedConstraintMatrix,
    options: WcscOptions,
    seed: u64,
) -> Result<(ClusterAssignment, WcscReport)> {
    check_k(emb.rows(), k)?;
    let fallback = |doublings: usize| -> Result<(ClusterAssignment, WcscReport)> {
        let a = spectral_with_iters(emb, k, seed, options.kmeans_iters)?;
        Ok((
            a,
            WcscReport {
                alpha: None,
                doublings,
                fell_back: true,
                eigenvalues: Vec::new(),
                max_residual: 0.0,
            },
        ))
    };
    if r.is_empty() {
        return fallback(0);
    }
    let mut ops = SpectralOperators::build(emb, r, options.alpha)?;
    if !(ops.alpha > 0.0) {
        log::warn!("constraint operator is zero; using unconstrained spectral clustering");
        return fallback(0);
    }
    let lap = eigen(ops.laplacian.clone(), "normalized Laplacian")?;

    for doublings in 0..=ALPHA_RETRIES {
        if doublings > 0 {
            ops.alpha *= 2.0;
        }
        let b = ops.shifted_constraint();
        let pairs = feasible_pairs(&ops.laplacian, &b, &lap)?;
        if pairs.len() < k {
            continue;
        }
        let n = ops.n();
        let mut v = DMatrix::zeros(n, k);
        let mut eigenvalues = Vec::with_capacity(k);
        let mut max_residual = 0.0f64;
        for (c, (lambda, vec, residual)) in pairs.into_iter().take(k).enumerate() {
            for i in 0..n {
                v[(i, c)] = vec[i] / libm::sqrt(ops.degrees[i]);
            }
            eigenvalues.push(lambda);
            max_residual = max_residual.max(residual);
        }
        let assignment = cluster_rows(v, k, seed, options.kmeans_iters)?;
        return Ok((
            assignment,
            WcscReport {
                alpha: Some(ops.alpha),
                doublings,
                fell_back: false,
                eigenvalues,
                max_residual,
            },
        ));
    }
    log::warn!(
        "fewer than {k} feasible generalized eigenvectors after {ALPHA_RETRIES} doublings; using unconstrained spectral clustering"
    );
    fallback(ALPHA_RETRIES)
}

/// Feasible generalized eigenpairs `(lambda, unit v, residual)` of
/// `L v = lambda B v`, ascending in `lambda`, residual-checked.
fn feasible_pairs(
    l: &DMatrix<f64>,
    b: &DMatrix<f64>,
    lap: &SymmetricEigen<f64, nalgebra::Dyn>,
) -> Result<Vec<(f64, DVector<f64>, f64)>> {
    let n = l.nrows();
    let scale = lap.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let (null_idx, range_idx): (Vec<usize>, Vec<usize>) =
        sorted(lap).into_iter().partition(|&i| lap.eigenvalues[i] <= NULL_TOL * scale);
    let z = DMatrix::from_fn(n, null_idx.len(), |i, c| lap.eigenvectors[(i, null_idx[c])]);
    let u = DMatrix::from_fn(n, range_idx.len(), |i, c| lap.eigenvectors[(i, range_idx[c])]);
    let lam: Vec<f64> = range_idx.iter().map(|&i| lap.eigenvalues[i]).collect();

    let bz = b * &z;
    let bu = b * &u;
    let zbz = z.transpose() * &bz;
    let zbz = (&zbz + zbz.transpose()) * 0.5;
    let zeig = eigen(zbz, "null-space constraint block")?;
    let bscale = zeig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let mut candidates: Vec<(f64, DVector<f64>)> = Vec::new();
    // lambda = 0: null directions on which the constraint form is positive
    for (c, &beta) in zeig.eigenvalues.iter().enumerate() {
        if beta > NULL_TOL * bscale {
            candidates.push((0.0, &z * zeig.eigenvectors.column(c)));
        }
    }

    // pseudo-inverse of Z'BZ over its well-conditioned part
    let mut zbz_pinv = DMatrix::zeros(z.ncols(), z.ncols());
    for (c, &beta) in zeig.eigenvalues.iter().enumerate() {
        if beta.abs() > NULL_TOL * bscale {
            let col = zeig.eigenvectors.column(c);
            zbz_pinv += (&col * col.transpose()) / beta;
        }
    }
    let zbu = z.transpose() * &bu;
    let coupling = &zbz_pinv * &zbu;
    let mut s = u.transpose() * &bu - zbu.transpose() * &coupling;
    let m = s.ncols();
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] /= libm::sqrt(lam[i] * lam[j]);
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    let seig = eigen(s, "reduced constraint pencil")?;
    for (c, &mu) in seig.eigenvalues.iter().enumerate() {
        if mu <= 0.0 {
            continue;
        }
        let p = DVector::from_fn(m, |i, _| seig.eigenvectors[(i, c)] / libm::sqrt(lam[i]));
        let q = -(&coupling * &p);
        candidates.push((1.0 / mu, &u * p + &z * q));
    }

    let mut out = Vec::with_capacity(candidates.len());
    for (lambda, v) in candidates {
        let norm = v.norm();
        if !(norm > 0.0) {
            
            continue;
        }
        let v = v / norm;
        let bv = b * &v;
        if v.dot(&bv) <= 0.0 {
            continue;
        }
        let residual = (l * &v - bv * lambda).norm();
        if residual > RESIDUAL_TOL {
            log::warn!("dropping generalized eigenpair with lambda {lambda:e}: residual {residual:e}");
            continue;
        }
        out.push((lambda, v, residual));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}
