//! Greedy selection of pair-disjoint text triplets with the largest estimated
//! spanning triangle centrality.
//!
//! Every rank `i` owns a [`CompressedIndexHeap`] of the partners it has been
//! paired with (as the smaller rank). From the last pushed triangle
//! `(a, b, c)` the candidates come from rows `a - 1`, `a` and `a + 1`: the
//! row's next free partner `b' = min(H_row) + 1` and the first rank above
//! `min(H_b')` free in both heaps.

use alloc::vec::Vec;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::index_heap::{greedy_scan, CompressedIndexHeap};
use crate::rank::RankOrder;

/// Three 1-based degree ranks, `a < b < c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Triangle {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        Triangle { a, b, c }
    }

    pub fn pairs(&self) -> [(usize, usize); 3] {
        [(self.a, self.b), (self.a, self.c), (self.b, self.c)]
    }
}

#[derive(Debug, Clone)]
pub struct TriangleSelection {
    pub triangles: Vec<Triangle>,
    /// Estimated STC of each triangle, aligned with `triangles`.
    pub scores: Vec<f64>,
    pub rank_to_id: Vec<usize>,
    /// `heaps[i - 1]` belongs to rank `i`.
    pub heaps: Vec<CompressedIndexHeap>,
    pub exhausted: bool,
    /// Largest heap size observed during the run.
    pub peak_heap_len: usize,
    /// Candidate set considered at each push after the first, when traced.
    pub trace: Option<Vec<Vec<Triangle>>>,
}

impl TriangleSelection {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Selected triplets as corpus ids, in selection order.
    pub fn id_triples(&self) -> Vec<(usize, usize, usize)> {
        let id = |r: usize| self.rank_to_id[r - 1];
        self.triangles
            .iter()
            .map(|t| (id(t.a), id(t.b), id(t.c)))
            .collect()
    }

    pub fn total_score(&self) -> f64 {
        self.scores.iter().sum()
    }
}

pub fn select_triangles(corpus: &Corpus, n_triangles: usize) -> Result<TriangleSelection> {
    select_ranked(&RankOrder::new(corpus.degrees()), n_triangles, false)
}

/// Same as [`select_triangles`] but records the candidate set of every step.
pub fn select_triangles_traced(corpus: &Corpus, n_triangles: usize) -> Result<TriangleSelection> {
    select_ranked(&RankOrder::new(corpus.degrees()), n_triangles, true)
}

pub fn select_ranked(order: &RankOrder, n_triangles: usize, trace: bool) -> Result<TriangleSelection> {
    let n = order.len();
    if n < 3 {
        return Err(Error::TooFewTexts { need: 3, got: n });
    }
    let mut sel = TriangleSelection {
        triangles: Vec::with_capacity(n_triangles),
        scores: Vec::with_capacity(n_triangles),
        rank_to_id: order.rank_to_id().to_vec(),
        heaps: (1..=n).map(CompressedIndexHeap::new).collect(),
        exhausted: false,
        peak_heap_len: 1,
        trace: trace.then(Vec::new),
    };
    if n_triangles == 0 {
        return Ok(sel);
    }

    sel.push(order, Triangle::new(1, 2, 3));

    while sel.triangles.len() < n_triangles {
        let last = *sel.triangles.last().expect("non-empty");
        let mut candidates: Vec<Triangle> = Vec::with_capacity(3);
        let rows = [last.a.checked_sub(1).filter(|&r| r >= 1), Some(last.a), Some(last.a + 1)];
        for row in rows.into_iter().flatten().filter(|&r| r <= n) {
            if let Some(t) = sel.candidate(row, n) {
                if !candidates.contains(&t) {
                    candidates.push(t);
                }
            }
        }
        let Some(best) = argmax(order, &candidates) else {
            sel.exhausted = true;
            break;
        };
        if let Some(t) = sel.trace.as_mut() {
            t.push(candidates);
        }
        sel.push(order, best);
    }
    Ok(sel)
}

impl TriangleSelection {
    fn heap(&self, rank: usize) -> &CompressedIndexHeap {
        &self.heaps[rank - 1]
    }

    fn candidate(&self, row: usize, n: usize) -> Option<Triangle> {
        let b = self.heap(row).min() + 1;
        if b > n {
            return None;
        }
        let c = greedy_scan(self.heap(row), self.heap(b), n)?;
        (row < b && b < c).then(|| Triangle::new(row, b, c))
    }

    fn push(&mut self, order: &RankOrder, t: Triangle) {
        self.heaps[t.a - 1].add(&[t.b, t.c]);
        self.heaps[t.b - 1].add(&[t.c]);
        self.peak_heap_len = self
            .peak_heap_len
            .max(self.heaps[t.a - 1].len())
            .max(self.heaps[t.b - 1].len());
        self.scores.push(order.stc(t.a, t.b, t.c));
        self.triangles.push(t);
    }
}

/// Highest-STC triangle; ties go to the lexicographically smallest triple.
fn argmax(order: &RankOrder, candidates: &[Triangle]) -> Option<Triangle> {
    let mut best: Option<(Triangle, f64)> = None;
    for &t in candidates {
        let s = order.stc(t.a, t.b, t.c);
        best = match best {
            Some((b, bs)) if bs > s || (bs == s && b < t) => Some((b, bs)),
            _ => Some((t, s)),
        };
    }
    best.map(|(t, _)| t)
}
