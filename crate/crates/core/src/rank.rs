//! Degree-ascending ordering of texts, shared by edge and triangle selection.
//!
//! Ranks are 1-based: rank 1 is the text with the smallest degree, so its
//! reciprocal degree is the largest.

use alloc::vec::Vec;

use crate::corpus::DegreeProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct RankOrder {
    rank_to_id: Vec<usize>,
    inv_degree: Vec<f64>,
}

impl RankOrder {
    /// Sorts by clamped degree ascending, ties broken by id ascending.
    pub fn new(deg: &DegreeProfile) -> Self {
        let mut ids: Vec<usize> = (0..deg.len()).collect();
        ids.sort_by(|&a, &b| deg.degrees[a].total_cmp(&deg.degrees[b]).then(a.cmp(&b)));
        let inv_degree = ids.iter().map(|&id| deg.inverse(id)).collect();
        RankOrder {
            rank_to_id: ids,
            inv_degree,
        }
    }

    pub fn len(&self) -> usize {
        self.rank_to_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_to_id.is_empty()
    }

    /// Corpus id of the text at 1-based `rank`.
    pub fn id(&self, rank: usize) -> usize {
        self.rank_to_id[rank - 1]
    }

    /// `1 / d` of the text at 1-based `rank`.
    pub fn inv_degree(&self, rank: usize) -> f64 {
        self.inv_degree[rank - 1]
    }

    pub fn rank_to_id(&self) -> &[usize] {
        &self.rank_to_id
    }

    /// Estimated spanning edge centrality of two ranks.
    pub fn sec(&self, a: usize, b: usize) -> f64 {
        self.inv_degree(a) + self.inv_degree(b)
    }

    /// Estimated spanning triangle centrality of three ranks.
    pub fn stc(&self, a: usize, b: usize, c: usize) -> f64 {
        self.inv_degree(a) + self.inv_degree(b) + self.inv_degree(c)
    }
}

/// `1/d(a) + 1/d(b)` for two positive (clamped) degrees.
pub fn sec(deg_a: f64, deg_b: f64) -> f64 {
    1.0 / deg_a + 1.0 / deg_b
}

/// `1/d(a) + 1/d(b) + 1/d(c)` for three positive (clamped) degrees.
pub fn stc(deg_a: f64, deg_b: f64, deg_c: f64) -> f64 {
    1.0 / deg_a + 1.0 / deg_b + 1.0 / deg_c
}
