//! Per-constraint importance weights and the signed constraint matrix.
//!
//! The default weight is a shifted pointwise mutual information between the
//! two texts, where a text's marginal is proportional to its reciprocal
//! degree and the joint is proportional to the reciprocal similarity:
//!
//! ```text
//! pmi(a, b) = ln( d(a) d(b) / s(a, b) * sum_x 1/d(x) + 1 )
//! ```
//!
//! Similarities are floored at [`DEGREE_FLOOR`] before any division, root or
//! logarithm.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{clamp_floor, dot, Corpus, DegreeProfile, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::oracle::{ConstraintSet, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Every constraint weighs 1.
    None,
    Ess,
    Sess,
    Less,
    Sec,
    Ssec,
    Ipmi,
    Pmi,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::None,
        Scheme::Ess,
        Scheme::Sess,
        Scheme::Less,
        Scheme::Sec,
        Scheme::Ssec,
        Scheme::Ipmi,
        Scheme::Pmi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Ess => "ess",
            Scheme::Sess => "sess",
            Scheme::Less => "less",
            Scheme::Sec => "sec",
            Scheme::Ssec => "ssec",
            Scheme::Ipmi => "ipmi",
            Scheme::Pmi => "pmi",
        }
    }
}

impl core::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == lower)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown weighting scheme {s:?}")))
    }
}

/// Shifted PMI of two texts.
pub fn pmi(a: usize, b: usize, emb: &EmbeddingMatrix, deg: &DegreeProfile) -> f64 {
    let s = clamp_floor(dot(emb.row(a), emb.row(b)));
    libm::log(deg.degree(a) * deg.degree(b) / s * deg.inv_degree_sum + 1.0)
}

/// Raw (un-normalized) weight of the pair under `scheme`.
pub fn scheme_weight(a: usize, b: usize, scheme: Scheme, emb: &EmbeddingMatrix, deg: &DegreeProfile) -> f64 {
    let raw_s = dot(emb.row(a), emb.row(b));
    pair_weight(scheme, raw_s, deg.degree(a), deg.degree(b), deg)
}

#[inline]
fn pair_weight(scheme: Scheme, raw_s: f64, da: f64, db: f64, deg: &DegreeProfile) -> f64 {
    let s = clamp_floor(raw_s);
    match scheme {
        Scheme::None => 1.0,
        Scheme::Ess => raw_s,
        Scheme::Sess => libm::sqrt(s),
        Scheme::Less => libm::log(s + 1.0),
        Scheme::Sec => 1.0 / da + 1.0 / db,
        Scheme::Ssec => libm::sqrt(1.0 / da + 1.0 / db),
        Scheme::Ipmi => libm::log(s * deg.degree_sum / (da * db) + 1.0),
        Scheme::Pmi => libm::log(da * db / s * deg.inv_degree_sum + 1.0),
    }
}

/// Raw weights for many pairs at once.
pub fn scheme_weights(pairs: &[(usize, usize)], scheme: Scheme, corpus: &Corpus) -> Vec<f64> {
    let emb = corpus.embeddings();
    let deg = corpus.degrees();
    pairs
        .iter()
        .map(|&(a, b)| pair_weight(scheme, dot(emb.row(a), emb.row(b)), deg.degrees[a], deg.degrees[b], deg))
        .collect()
}

/// Affine min-max map onto `[lo, hi]`; constant input maps to the midpoint.
pub fn normalize_range(values: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(hi > lo) {
        return Err(Error::InvalidParameter(alloc::format!("empty range [{lo}, {hi}]")));
    }
    let Some(min) = values.iter().copied().reduce(f64::min) else {
        return Ok(Vec::new());
    };
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= 0.0 || !(max - min).is_finite() {
        return Ok(vec![(lo + hi) / 2.0; values.len()]);
    }
    let scale = (hi - lo) / (max - min);
    Ok(values.iter().map(|v| lo + (v - min) * scale).collect())
}

/// Which clusterer the matrix is built for; decides the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMode {
    /// Must- and cannot-link weights normalized jointly.
    Wcsc,
    /// Must- and cannot-link weights normalized separately.
    Wckmeans,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRanges {
    pub wcsc: (f64, f64),
    pub must_link: (f64, f64),
    pub cannot_link: (f64, f64),
}

impl Default for WeightRanges {
    fn default() -> Self {
        WeightRanges {
            wcsc: (0.5, 1.5),
            must_link: (0.01, 0.1),
            cannot_link: (0.0, 0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedConstraint {
    pub a: usize,
    pub b: usize,
    pub relation: Relation,
    /// Normalized magnitude; the matrix entry carries the relation's sign.
    pub weight: f64,
}

impl WeightedConstraint {
    pub fn signed(&self) -> f64 {
        match self.relation {
            Relation::MustLink => self.weight,
            Relation::CannotLink => -self.weight,
        }
    }
}

/// Sparse symmetric `n x n` matrix of signed constraint weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConstraintMatrix {
    n: usize,
    entries: Vec<WeightedConstraint>,
    lookup: HashMap<(usize, usize), usize>,
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl WeightedConstraintMatrix {
    pub fn empty(n: usize) -> Self {
        Self::from_entries(n, Vec::new())
    }

    /// Builds from already-weighted constraints. Pairs must be distinct,
    /// in range and not self-pairs.
    pub fn from_entries(n: usize, entries: Vec<WeightedConstraint>) -> Self {
        let mut lookup = HashMap::with_capacity(entries.len());
        let mut neighbors = vec![Vec::new(); n];
        for (i, e) in entries.iter().enumerate() {
            lookup.insert((e.a.min(e.b), e.a.max(e.b)), i);
            neighbors[e.a].push((e.b, i));
            neighbors[e.b].push((e.a, i));
        }
        WeightedConstraintMatrix {
            n,
            entries,
            lookup,
            neighbors,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[WeightedConstraint] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entry(a, b).map_or(0.0, |e| e.signed())
    }

    pub fn entry(&self, a: usize, b: usize) -> Option<&WeightedConstraint> {
        self.lookup.get(&(a.min(b), a.max(b))).map(|&i| &self.entries[i])
    }

    /// Constraints touching `i`, as `(partner, constraint)`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, &WeightedConstraint)> {
        self.neighbors[i].iter().map(move |&(j, k)| (j, &self.entries[k]))
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n * self.n];
        for e in &self.entries {
            let v = e.signed();
            m[e.a * self.n + e.b] = v;
            m[e.b * self.n + e.a] = v;
        }
        m
    }
}

/// Weights, normalizes and places must-links (positive) and cannot-links
/// (negative) into a symmetric matrix.
pub fn build_constraint_matrix(
    corpus: &Corpus,
    must: &[(usize, usize)],
    cannot: &[(usize, usize)],
    scheme: Scheme,
    mode: MatrixMode,
    ranges: &WeightRanges,
) -> Result<WeightedConstraintMatrix> {
    let n = corpus.len();
    let mut seen: HashMap<(usize, usize), Relation> = HashMap::new();
    for (pairs, rel) in [(must, Relation::MustLink), (cannot, Relation::CannotLink)] {
        for &(a, b) in pairs {
            for index in [a, b] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, len: n });
                }
            }
            if a == b {
                return Err(Error::InvalidParameter(alloc::format!("self-pair ({a}, {b})")));
            }
            let key = (a.min(b), a.max(b));
            match seen.insert(key, rel) {
                Some(prev) if prev != rel => return Err(Error::ConflictingConstraint { a: key.0, b: key.1 }),
                _ => {}
            }
        }
    }
    let dedup = |pairs: &[(usize, usize)]| {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        let mut set = hashbrown::HashSet::new();
        for &(a, b) in pairs {
            let key = (a.min(b), a.max(b));
            if set.insert(key) {
                out.push(key);
            }
        }
        out
    };
    let must = dedup(must);
    let cannot = dedup(cannot);
    let wm = scheme_weights(&must, scheme, corpus);
    let wc = scheme_weights(&cannot, scheme, corpus);

    let (nm, nc) = match mode {
        MatrixMode::Wcsc => {
            let joint: Vec<f64> = wm.iter().chain(&wc).copied().collect();
            let mut all = normalize_range(&joint, ranges.wcsc.0, ranges.wcsc.1)?;
            let nc = all.split_off(wm.len());
            (all, nc)
        }
        MatrixMode::Wckmeans => (
            normalize_range(&wm, ranges.must_link.0, ranges.must_link.1)?,
            normalize_range(&wc, ranges.cannot_link.0, ranges.cannot_link.1)?,
        ),
    };

    let entries = must
        .iter()
        .zip(nm)
        .map(|(&(a, b), w)| (a, b, Relation::MustLink, w))
        .chain(cannot.iter().zip(nc).map(|(&(a, b), w)| (a, b, Relation::CannotLink, w)))
        .map(|(a, b, relation, weight)| WeightedConstraint { a, b, relation, weight })
        .collect();
    Ok(WeightedConstraintMatrix::from_entries(n, entries))
}

/// [`build_constraint_matrix`] over a [`ConstraintSet`].
pub fn build_from_set(
    corpus: &Corpus,
    constraints: &ConstraintSet,
    scheme: Scheme,
    mode: MatrixMode,
    ranges: &WeightRanges,
) -> Result<WeightedConstraintMatrix> {
    let must: Vec<(usize, usize)> = constraints.must_links().map(|c| c.pair()).collect();
    let cannot: Vec<(usize, usize)> = constraints.cannot_links().map(|c| c.pair()).collect();
    build_constraint_matrix(corpus, &must, &cannot, scheme, mode, ranges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TextInstance, WhitespaceTokens, DEGREE_FLOOR};

    fn corpus() -> Corpus {
        let texts = (0..3)
            .map(|i| TextInstance::new(i, "t", Some(1), None, &WhitespaceTokens))
            .collect();
        Corpus::new(texts, &[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap()
    }

    #[test]
    fn pmi_scalar_example() {
        let c = corpus();
        // d = (1.6, 1.8, 2.4), sum 1/d = 1.597222..., s(0,2) = 0.6
        let want = libm::log(1.6 * 2.4 / 0.6 * (1.0 / 1.6 + 1.0 / 1.8 + 1.0 / 2.4) + 1.0);
        let got = pmi(0, 2, c.embeddings(), c.degrees());
        assert!((got - want).abs() < 1e-12);
        assert!((got - 2.4178).abs() < 1e-4, "{got}");
        assert_eq!(got, pmi(2, 0, c.embeddings(), c.degrees()));
    }

    #[test]
    fn pmi_grows_as_similarity_vanishes() {
        let c = corpus();
        // s(0,1) = 0 is floored, so the weight is large but finite
        let orthogonal = pmi(0, 1, c.embeddings(), c.degrees());
        assert!(orthogonal.is_finite() && orthogonal > pmi(0, 2, c.embeddings(), c.degrees()));
    }

    #[test]
    fn scheme_examples() {
        let c = corpus();
        let (e, d) = (c.embeddings(), c.degrees());
        assert_eq!(scheme_weight(0, 2, Scheme::None, e, d), 1.0);
        assert!((scheme_weight(0, 1, Scheme::Sec, e, d) - 1.180_555_555_555_555_6).abs() < 1e-12);
        assert!((scheme_weight(0, 2, Scheme::Less, e, d) - 0.470_003_629_245_735_5).abs() < 1e-12);
        assert!((scheme_weight(0, 2, Scheme::Sess, e, d) - libm::sqrt(0.6)).abs() < 1e-12);
        assert_eq!(scheme_weight(0, 1, Scheme::Sess, e, d), libm::sqrt(DEGREE_FLOOR));
        let vectorized = scheme_weights(&[(0, 2), (1, 2)], Scheme::Pmi, &c);
        assert_eq!(vectorized[0], pmi(0, 2, e, d));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_range(&[2.0, 4.0], 0.5, 1.5).unwrap(), vec![0.5, 1.5]);
        let flat = normalize_range(&[3.0, 3.0, 3.0], 0.01, 0.1).unwrap();
        assert!(flat.iter().all(|v| (v - 0.055).abs() < 1e-15));
        assert_eq!(normalize_range(&[1.0, 2.0, 3.0], 0.5, 1.5).unwrap(), vec![0.5, 1.0, 1.5]);
        assert!(normalize_range(&[], 0.0, 1.0).unwrap().is_empty());
        assert!(normalize_range(&[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn matrix_placement() {
        let entries = vec![
            WeightedConstraint { a: 0, b: 1, relation: Relation::MustLink, weight: 1.2 },
            WeightedConstraint { a: 0, b: 2, relation: Relation::CannotLink, weight: 0.8 },
        ];
        let m = WeightedConstraintMatrix::from_entries(3, entries);
        assert_eq!(m.get(0, 1), 1.2);
        assert_eq!(m.get(1, 0), 1.2);
        assert_eq!(m.get(0, 2), -0.8);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn single_must_link_gets_midpoint() {
        let m = build_constraint_matrix(&corpus(), &[(0, 1)], &[], Scheme::Pmi, MatrixMode::Wcsc, &WeightRanges::default())
            .unwrap();
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn empty_constraints_give_zero_matrix() {
        let m = build_constraint_matrix(&corpus(), &[], &[], Scheme::Pmi, MatrixMode::Wckmeans, &WeightRanges::default())
            .unwrap();
        assert!(m.is_empty());
        assert!(m.to_dense().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let err = build_constraint_matrix(
            &corpus(),
            &[(0, 1)],
            &[(1, 0)],
            Scheme::Pmi,
            MatrixMode::Wcsc,
            &WeightRanges::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::ConflictingConstraint { a: 0, b: 1 });
    }

    #[test]
    fn wckmeans_ranges_are_separate() {
        let m = build_constraint_matrix(
            &corpus(),
            &[(0, 1), (0, 2)],
            &[(1, 2)],
            Scheme::Pmi,
            MatrixMode::Wckmeans,
            &WeightRanges::default(),
        )
        .unwrap();
        let ml: Vec<f64> = m.entries().iter().filter(|e| e.relation == Relation::MustLink).map(|e| e.weight).collect();
        assert!(ml.iter().all(|w| (0.01..=0.1).contains(w)));
        assert_eq!(m.get(1, 2), -0.005);
    }
}
