use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterAssignment;
use crate::corpus::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::oracle::Relation;
use crate::weighting::WeightedConstraintMatrix;

pub const KMEANS_MAX_ITERS: usize = 300;
pub const WCKMEANS_MAX_ITERS: usize = 100;

const UNASSIGNED: usize = usize::MAX;

/// Seeded K-Means++ followed by Lloyd iterations.
pub fn kmeans_pp(emb: &EmbeddingMatrix, k: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    kmeans_points(emb.as_slice(), emb.dim(), k, seed, max_iters)
}

/// [`kmeans_pp`] over arbitrary row-major points.
pub fn kmeans_points(data: &[f64], dim: usize, k: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    lloyd(data, dim, k, seed, max_iters, None)
}

/// K-Means with weighted must-link / cannot-link penalties.
///
/// Point `i` joins the cluster minimizing its squared distance to the
/// centroid plus `w` for every must-link partner placed elsewhere and `w`
/// for every cannot-link partner placed in the same cluster. Points are
/// swept in ascending id order against one evolving label vector.
pub fn wckmeans(
    emb: &EmbeddingMatrix,
    k: usize,
    constraints: &WeightedConstraintMatrix,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterAssignment> {
    if constraints.dim() != emb.rows() {
        return Err(Error::LengthMismatch {
            left: constraints.dim(),
            right: emb.rows(),
        });
    }
    for e in constraints.entries() {
        if !(e.weight >= 0.0) || !e.weight.is_finite() {
            return Err(Error::WeightSignMismatch { a: e.a, b: e.b });
        }
    }
    lloyd(emb.as_slice(), emb.dim(), k, seed, max_iters, Some(constraints))
}

/// Within-cluster squared distance plus every violated constraint's weight.
pub fn wckmeans_objective(
    data: &[f64],
    dim: usize,
    labels: &[usize],
    centroids: &[f64],
    constraints: Option<&WeightedConstraintMatrix>,
) -> f64 {
    let mut total = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        total += sqdist(point(data, dim, i), point(centroids, dim, l));
    }
    if let Some(r) = constraints {
        for e in r.entries() {
            let same = labels[e.a] == labels[e.b];
            match e.relation {
                Relation::MustLink if !same => total += e.weight,
                Relation::CannotLink if same => total += e.weight,
                _ => {}
            }
        }
    }
    total
}

#[inline]
fn point(data: &[f64], dim: usize, i: usize) -> &[f64] {
    &data[i * dim..(i + 1) * dim]
}

#[inline]
fn sqdist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(data: &[f64], dim: usize, k: usize, max_iters: usize) -> Result<usize> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "{} values do not form rows of dimension {dim}",
            data.len()
        )));
    }
    let n = data.len() / dim;
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("iteration cap must be at least 1".into()));
    }
    Ok(n)
}

/// D²-weighted seeding; returns `k x dim` centroids.
fn seed_centroids(data: &[f64], dim: usize, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = (0..n).map(|i| sqdist(point(data, dim, i), point(data, dim, chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    acc += w;
                    pick = Some(i);
                    if acc > target {
                        break;
                    }
                }
            }
            pick.expect("positive total has a positive term")
        } else {
            // every point coincides with a seed; take an unused one
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        let c = point(data, dim, next);
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min(sqdist(point(data, dim, i), c));
        }
    }
    let mut centroids = Vec::with_capacity(k * dim);
    for &c in &chosen {
        centroids.extend_from_slice(point(data, dim, c));
    }
    centroids
}

/// Constraint penalty `i` incurs in cluster `c` given current labels.
fn penalty(i: usize, c: usize, labels: &[usize], r: Option<&WeightedConstraintMatrix>) -> f64 {
    let Some(r) = r else { return 0.0 };
    let mut p = 0.0;
    for (j, e) in r.neighbors(i) {
        let lj = labels[j];
        if lj == UNASSIGNED {
            continue;
        }
        match e.relation {
            Relation::MustLink if lj != c => p += e.weight,
            Relation::CannotLink if lj == c => p += e.weight,
            _ => {}
        }
    }
    p
}

/// One ascending-id assignment pass; returns whether any label moved.
fn sweep(
    data: &[f64],
    dim: usize,
    k: usize,
    centroids: &[f64],
    labels: &mut [usize],
    r: Option<&WeightedConstraintMatrix>,
) -> bool {
    let mut changed = false;
    for i in 0..labels.len() {
        let x = point(data, dim, i);
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for c in 0..k {
            let cost = sqdist(x, point(centroids, dim, c)) + penalty(i, c, labels, r);
            if cost < best_cost {
                best_cost = cost;
                best = c;
            }
        }
        if labels[i] != best {
            labels[i] = best;
            changed = true;
        }
    }
    changed
}

/// Refills empty clusters by moving in the point whose move lowers the
/// objective most; without constraints that is the point farthest from
/// its centroid. Returns whether anything moved.
fn repair_empty(
    data: &[f64],
    dim: usize,
    k: usize,
    centroids: &mut [f64],
    labels: &mut [usize],
    r: Option<&WeightedConstraintMatrix>,
) -> bool {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut moved = false;
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..labels.len() {
            let from = labels[i];
            if sizes[from] < 2 {
                continue;
            }
            let gain = -sqdist(point(data, dim, i), point(centroids, dim, from)) + penalty(i, empty, labels, r)
                - penalty(i, from, labels, r);
            if best.is_none_or(|(_, g)| gain < g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("k <= n leaves a cluster with two members");
        sizes[labels[i]] -= 1;
        sizes[empty] += 1;
        labels[i] = empty;
        centroids[empty * dim..(empty + 1) * dim].copy_from_slice(point(data, dim, i));
        moved = true;
    }
    moved
}

fn update_centroids(data: &[f64], dim: usize, k: usize, labels: &[usize], centroids: &mut [f64]) {
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(point(data, dim, i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = counts[c] as f64;
            for (dst, s) in centroids[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                *dst = s / inv;
            }
        }
    }
}

fn lloyd(
    data: &[f64],
    dim: usize,
    k: usize,
    seed: u64,
    max_iters: usize,
    r: Option<&WeightedConstraintMatrix>,
) -> Result<ClusterAssignment> {
    let n = validate(data, dim, k, max_iters)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(data, dim, n, k, &mut rng);
    let mut labels = vec![UNASSIGNED; n];
    let mut trace = Vec::new();
    let mut iterations_used = 0;
    for iter in 1..=max_iters {
        iterations_used = iter;
        let mut changed = sweep(data, dim, k, &centroids, &mut labels, r);
        changed |= repair_empty(data, dim, k, &mut centroids, &mut labels, r);
        update_centroids(data, dim, k, &labels, &mut centroids);
        trace.push(wckmeans_objective(data, dim, &labels, &centroids, r));
        if !changed {
            break;
        }
    }
    Ok(ClusterAssignment {
        labels,
        k,
        centroids,
        dim,
        iterations_used,
        objective_trace: trace,
    })
}
