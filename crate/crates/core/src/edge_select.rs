//! Greedy selection of the `N` text pairs with the largest estimated spanning
//! edge centrality.
//!
//! Texts are ranked by degree ascending. Each row `a` keeps a cursor `p(a)`,
//! the next partner rank it would pair with; a row's picks are therefore
//! always the consecutive ranks `a+1 .. p(a)-1`. After pushing `(a, b)` the
//! next edge is the best of `(1, p(1))`, `(a, b+1)` and `(a+1, p(a+1))`.

use alloc::vec::Vec;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rank::RankOrder;

/// A pair of 1-based degree ranks, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Edge { a, b }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSelection {
    pub edges: Vec<Edge>,
    /// Estimated SEC of each selected edge, aligned with `edges`.
    pub scores: Vec<f64>,
    pub rank_to_id: Vec<usize>,
    /// `cursors[a - 1]` is the next suggested partner rank for row `a`.
    pub cursors: Vec<usize>,
    /// Set when the candidate frontier emptied before reaching the target.
    pub exhausted: bool,
    /// Candidate set considered at each push after the first, when traced.
    pub trace: Option<Vec<Vec<Edge>>>,
}

impl EdgeSelection {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Selected pairs as corpus ids, in selection order.
    pub fn id_pairs(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| (self.rank_to_id[e.a - 1], self.rank_to_id[e.b - 1]))
            .collect()
    }

    pub fn total_score(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// Largest first rank among the selected edges.
    pub fn max_first_rank(&self) -> usize {
        self.edges.iter().map(|e| e.a).max().unwrap_or(0)
    }
}

/// `ceil((sqrt(8N + 1) - 1) / 2)`: the largest first rank a greedy selection
/// of `N` edges can reach.
pub fn first_rank_bound(n_edges: usize) -> usize {
    let root = libm::sqrt(8.0 * n_edges as f64 + 1.0);
    let bound = libm::ceil((root - 1.0) / 2.0 - 1e-12) as usize;
    // guard the float ceil with an exact integer check
    let mut i = bound.saturating_sub(1);
    while i * (i + 1) / 2 < n_edges {
        i += 1;
    }
    i
}

pub fn select_edges(corpus: &Corpus, n_edges: usize) -> Result<EdgeSelection> {
    select_ranked(&RankOrder::new(corpus.degrees()), n_edges, false)
}

/// Same as [`select_edges`] but records the candidate set of every step.
pub fn select_edges_traced(corpus: &Corpus, n_edges: usize) -> Result<EdgeSelection> {
    select_ranked(&RankOrder::new(corpus.degrees()), n_edges, true)
}

pub fn select_ranked(order: &RankOrder, n_edges: usize, trace: bool) -> Result<EdgeSelection> {
    let n = order.len();
    if n < 2 {
        return Err(Error::TooFewTexts { need: 2, got: n });
    }
    let mut cursors: Vec<usize> = (2..=n + 1).collect();
    let mut sel = EdgeSelection {
        edges: Vec::with_capacity(n_edges),
        scores: Vec::with_capacity(n_edges),
        rank_to_id: order.rank_to_id().to_vec(),
        cursors: Vec::new(),
        exhausted: false,
        trace: trace.then(Vec::new),
    };
    if n_edges == 0 {
        sel.cursors = cursors;
        return Ok(sel);
    }

    sel.edges.push(Edge::new(1, 2));
    sel.scores.push(order.sec(1, 2));
    cursors[0] = 3;

    let admissible = |e: &Edge, cursors: &[usize]| e.a < e.b && e.b <= n && e.b >= cursors[e.a - 1];

    while sel.edges.len() < n_edges {
        let last = *sel.edges.last().expect("non-empty");
        let mut candidates: Vec<Edge> = Vec::with_capacity(3);
        let rows = [
            Edge::new(1, cursors[0]),
            Edge::new(last.a, last.b + 1),
            Edge::new(last.a + 1, if last.a < n { cursors[last.a] } else { n + 1 }),
        ];
        for e in rows {
            if e.a <= n && admissible(&e, &cursors) && !candidates.contains(&e) {
                candidates.push(e);
            }
        }
        let Some((best, score)) = argmax(order, &candidates) else {
            sel.exhausted = true;
            break;
        };
        if let Some(t) = sel.trace.as_mut() {
            t.push(candidates);
        }
        sel.edges.push(best);
        sel.scores.push(score);
        cursors[best.a - 1] = best.b + 1;
    }
    sel.cursors = cursors;
    Ok(sel)
}

/// Highest-SEC edge; ties go to the lexicographically smallest pair.
fn argmax(order: &RankOrder, candidates: &[Edge]) -> Option<(Edge, f64)> {
    let mut best: Option<(Edge, f64)> = None;
    for &e in candidates {
        let s = order.sec(e.a, e.b);
        best = match best {
            Some((b, bs)) if bs > s || (bs == s && b < e) => Some((b, bs)),
            _ => Some((e, s)),
        };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextInstance;
    use crate::corpus::WhitespaceTokens;
    use alloc::vec;

    fn three_point_corpus() -> Corpus {
        let texts = (0..3)
            .map(|i| TextInstance::new(i, "t", Some(1), None, &WhitespaceTokens))
            .collect();
        Corpus::new(texts, &[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap()
    }

    #[test]
    fn single_edge_is_global_max() {
        let sel = select_edges(&three_point_corpus(), 1).unwrap();
        assert_eq!(sel.edges, vec![Edge::new(1, 2)]);
        assert_eq!(sel.id_pairs(), vec![(0, 1)]);
    }

    #[test]
    fn three_edges_in_greedy_order() {
        let sel = select_edges(&three_point_corpus(), 3).unwrap();
        assert_eq!(sel.edges, vec![Edge::new(1, 2), Edge::new(1, 3), Edge::new(2, 3)]);
        let want = [1.180_555_555_555_555_6, 1.041_666_666_666_666_7, 0.972_222_222_222_222_2];
        for (got, want) in sel.scores.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(!sel.exhausted);
        assert!(sel.max_first_rank() <= first_rank_bound(3));
        assert_eq!(first_rank_bound(3), 2);
    }

    #[test]
    fn exhaustion_returns_partial_selection() {
        let sel = select_edges(&three_point_corpus(), 10).unwrap();
        assert_eq!(sel.len(), 3);
        assert!(sel.exhausted);
    }

    #[test]
    fn zero_edges_and_tiny_corpus() {
        assert!(select_edges(&three_point_corpus(), 0).unwrap().is_empty());
        let one = Corpus::new(
            vec![TextInstance::new(0, "t", Some(1), None, &WhitespaceTokens)],
            &[[1.0]],
        )
        .unwrap();
        assert_eq!(
            select_edges(&one, 1).unwrap_err(),
            Error::TooFewTexts { need: 2, got: 1 }
        );
    }

    #[test]
    fn bound_matches_triangular_numbers() {
        assert_eq!(first_rank_bound(1), 1);
        assert_eq!(first_rank_bound(2), 2);
        assert_eq!(first_rank_bound(6), 3);
        assert_eq!(first_rank_bound(7), 4);
        assert_eq!(first_rank_bound(1000), 45);
    }
}
