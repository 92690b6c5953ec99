//! Texts, unit-normalized embeddings, and the similarity/degree primitives
//! shared by selection, weighting and clustering.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Degrees at or below this value are replaced by it before any reciprocal.
pub const DEGREE_FLOOR: f64 = 1e-12;

/// Counts tokens in a text for budgeting.
pub trait TokenCounter {
    fn count(&self, text: &str) -> usize;
}

/// Whitespace-separated token count.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokens;

impl TokenCounter for WhitespaceTokens {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

impl<F: Fn(&str) -> usize> TokenCounter for F {
    fn count(&self, text: &str) -> usize {
        self(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextInstance {
    pub id: usize,
    pub text: String,
    pub token_count: usize,
    pub label: Option<String>,
}

impl TextInstance {
    /// Builds an instance, counting tokens with `tokenizer` unless an explicit
    /// count is given. Counts are floored at one.
    pub fn new(
        id: usize,
        text: impl Into<String>,
        tokens: Option<usize>,
        label: Option<String>,
        tokenizer: &dyn TokenCounter,
    ) -> Self {
        let text = text.into();
        let token_count = tokens.unwrap_or_else(|| tokenizer.count(&text)).max(1);
        TextInstance {
            id,
            text,
            token_count,
            label,
        }
    }
}

/// Row-major `n x d` matrix whose rows have unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl EmbeddingMatrix {
    /// Normalizes each row to unit length. Rows must share a dimension and
    /// none may be zero.
    pub fn normalize<R: AsRef<[f64]>>(raw: &[R]) -> Result<Self> {
        let rows = raw.len();
        let dim = raw.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows * dim);
        for (i, row) in raw.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::RaggedEmbedding {
                    row: i,
                    got: row.len(),
                    expected: dim,
                });
            }
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroEmbedding { id: i });
            }
            data.extend(row.iter().map(|v| v / norm));
        }
        Ok(EmbeddingMatrix { data, rows, dim })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Embedding-based semantic similarity: the dot product of two rows.
    pub fn ess(&self, a: usize, b: usize) -> Result<f64> {
        for index in [a, b] {
            if index >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index,
                    len: self.rows,
                });
            }
        }
        Ok(dot(self.row(a), self.row(b)))
    }

    fn permute(&self, order: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            data,
            rows: self.rows,
            dim: self.dim,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-text total similarity to the whole corpus (self included).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    /// Unclamped `x_a . sum_i x_i`.
    pub raw: Vec<f64>,
    /// `raw` floored at [`DEGREE_FLOOR`]; every reciprocal uses these.
    pub degrees: Vec<f64>,
    pub sum_vector: Vec<f64>,
    /// Sum over texts of `1 / degree`.
    pub inv_degree_sum: f64,
    /// Sum over texts of the clamped degrees.
    pub degree_sum: f64,
}

impl DegreeProfile {
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degree(&self, a: usize) -> f64 {
        self.degrees[a]
    }

    pub fn inverse(&self, a: usize) -> f64 {
        1.0 / self.degrees[a]
    }
}

/// Computes degrees in `O(nd)` through the precomputed sum of all rows.
pub fn compute_degrees(emb: &EmbeddingMatrix) -> DegreeProfile {
    let mut sum_vector = vec![0.0; emb.dim()];
    for row in emb.iter_rows() {
        for (s, v) in sum_vector.iter_mut().zip(row) {
            *s += v;
        }
    }
    let raw: Vec<f64> = emb.iter_rows().map(|row| dot(row, &sum_vector)).collect();
    let degrees: Vec<f64> = raw.iter().map(|&d| clamp_floor(d)).collect();
    let inv_degree_sum = degrees.iter().map(|d| 1.0 / d).sum();
    let degree_sum = degrees.iter().sum();
    DegreeProfile {
        raw,
        degrees,
        sum_vector,
        inv_degree_sum,
        degree_sum,
    }
}

#[inline]
pub(crate) fn clamp_floor(v: f64) -> f64 {
    if v > DEGREE_FLOOR {
        v
    } else {
        DEGREE_FLOOR
    }
}

/// A loaded corpus: texts in id order, their embeddings and degrees.
#[derive(Debug, Clone)]
pub struct Corpus {
    texts: Vec<TextInstance>,
    embeddings: EmbeddingMatrix,
    degrees: DegreeProfile,
    total_tokens: usize,
}

impl Corpus {
    /// Assembles a corpus from texts and their embedding rows (aligned by
    /// position). Ids must be exactly `0..n` in any order; the result is
    /// stored in id order.
    pub fn new<R: AsRef<[f64]>>(texts: Vec<TextInstance>, raw_embeddings: &[R]) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if texts.len() != raw_embeddings.len() {
            return Err(Error::RowCountMismatch {
                texts: texts.len(),
                rows: raw_embeddings.len(),
            });
        }
        let n = texts.len();
        let mut position_of = vec![usize::MAX; n];
        for (pos, t) in texts.iter().enumerate() {
            if t.id >= n {
                return Err(Error::SparseId { id: t.id, n });
            }
            if position_of[t.id] != usize::MAX {
                return Err(Error::DuplicateId(t.id));
            }
            position_of[t.id] = pos;
        }
        let embeddings = match EmbeddingMatrix::normalize(raw_embeddings) {
            Ok(e) => e,
            Err(Error::ZeroEmbedding { id: row }) => {
                return Err(Error::ZeroEmbedding { id: texts[row].id })
            }
            Err(e) => return Err(e),
        };
        let embeddings = embeddings.permute(&position_of);
        let mut slots: Vec<Option<TextInstance>> = texts.into_iter().map(Some).collect();
        let texts: Vec<TextInstance> = position_of
            .iter()
            .map(|&p| slots[p].take().expect("positions are a permutation"))
            .collect();
        Ok(Self::from_sorted(texts, embeddings))
    }

    /// Corpus from already-normalized embeddings with texts in id order.
    pub fn from_embeddings(texts: Vec<TextInstance>, embeddings: EmbeddingMatrix) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if texts.len() != embeddings.rows() {
            return Err(Error::RowCountMismatch {
                texts: texts.len(),
                rows: embeddings.rows(),
            });
        }
        for (i, t) in texts.iter().enumerate() {
            if t.id != i {
                return Err(Error::SparseId {
                    id: t.id,
                    n: texts.len(),
                });
            }
        }
        Ok(Self::from_sorted(texts, embeddings))
    }

    fn from_sorted(texts: Vec<TextInstance>, embeddings: EmbeddingMatrix) -> Self {
        let degrees = compute_degrees(&embeddings);
        let total_tokens = texts.iter().map(|t| t.token_count).sum();
        Corpus {
            texts,
            embeddings,
            degrees,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn texts(&self) -> &[TextInstance] {
        &self.texts
    }

    pub fn text(&self, id: usize) -> &TextInstance {
        &self.texts[id]
    }

    pub fn embeddings(&self) -> &EmbeddingMatrix {
        &self.embeddings
    }

    pub fn degrees(&self) -> &DegreeProfile {
        &self.degrees
    }

    /// Corpus size: total tokens over all texts.
    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// Mean tokens per text.
    pub fn mean_tokens(&self) -> f64 {
        self.total_tokens as f64 / self.texts.len() as f64
    }

    pub fn ess(&self, a: usize, b: usize) -> Result<f64> {
        self.embeddings.ess(a, b)
    }

    /// Ground-truth labels mapped to dense integers in order of first
    /// appearance, if every text carries one.
    pub fn label_indices(&self) -> Option<Vec<usize>> {
        let mut seen: Vec<&str> = Vec::new();
        self.texts
            .iter()
            .map(|t| {
                let label = t.label.as_deref()?;
                Some(match seen.iter().position(|s| *s == label) {
                    Some(i) => i,
                    None => {
                        seen.push(label);
                        seen.len() - 1
                    }
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn text(id: usize, tokens: usize) -> TextInstance {
        TextInstance::new(id, "x", Some(tokens), None, &WhitespaceTokens)
    }

    #[test]
    fn corpus_size_and_mean_tokens() {
        let texts = vec![text(0, 2), text(1, 3), text(2, 5)];
        let rows = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let c = Corpus::new(texts, &rows).unwrap();
        assert_eq!(c.total_tokens(), 10);
        assert!((c.mean_tokens() - 10.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let rows: [[f64; 2]; 0] = [];
        assert_eq!(Corpus::new(Vec::new(), &rows).unwrap_err(), Error::EmptyCorpus);
    }

    #[test]
    fn duplicate_and_sparse_ids() {
        let rows = [[1.0, 0.0], [0.0, 1.0]];
        let dup = Corpus::new(vec![text(0, 1), text(0, 1)], &rows).unwrap_err();
        assert_eq!(dup, Error::DuplicateId(0));
        let sparse = Corpus::new(vec![text(0, 1), text(5, 1)], &rows).unwrap_err();
        assert_eq!(sparse, Error::SparseId { id: 5, n: 2 });
    }

    #[test]
    fn out_of_order_ids_are_sorted_with_their_rows() {
        let rows = [[0.0, 2.0], [3.0, 0.0]];
        let c = Corpus::new(vec![text(1, 1), text(0, 1)], &rows).unwrap();
        assert_eq!(c.embeddings().row(0), &[1.0, 0.0]);
        assert_eq!(c.embeddings().row(1), &[0.0, 1.0]);
    }

    #[test]
    fn whitespace_tokenizer_and_floor() {
        let t = TextInstance::new(0, "  the quick  fox ", None, None, &WhitespaceTokens);
        assert_eq!(t.token_count, 3);
        let empty = TextInstance::new(0, "", None, None, &WhitespaceTokens);
        assert_eq!(empty.token_count, 1);
        let custom = TextInstance::new(0, "abcd", None, None, &|s: &str| s.len());
        assert_eq!(custom.token_count, 4);
    }

    #[test]
    fn normalize_rows() {
        let m = EmbeddingMatrix::normalize(&[[3.0, 4.0]]).unwrap();
        assert!((m.row(0)[0] - 0.6).abs() < 1e-15 && (m.row(0)[1] - 0.8).abs() < 1e-15);
        let unit = [0.6, 0.8];
        let again = EmbeddingMatrix::normalize(&[unit]).unwrap();
        assert!((again.row(0)[0] - 0.6).abs() < 1e-12 && (again.row(0)[1] - 0.8).abs() < 1e-12);
        let err = EmbeddingMatrix::normalize(&[[1.0, 0.0], [0.0, 0.0]]).unwrap_err();
        assert_eq!(err, Error::ZeroEmbedding { id: 1 });
    }

    #[test]
    fn zero_row_error_names_text_id() {
        let rows = [[0.0, 0.0], [1.0, 0.0]];
        let err = Corpus::new(vec![text(1, 1), text(0, 1)], &rows).unwrap_err();
        assert_eq!(err, Error::ZeroEmbedding { id: 1 });
    }

    #[test]
    fn ess_examples() {
        let m = EmbeddingMatrix::normalize(&[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap();
        assert_eq!(m.ess(0, 0).unwrap(), 1.0);
        assert_eq!(m.ess(0, 1).unwrap(), 0.0);
        assert!((m.ess(0, 2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(m.ess(0, 3).unwrap_err(), Error::IndexOutOfRange { index: 3, len: 3 });
    }

    #[test]
    fn degree_examples() {
        let m = EmbeddingMatrix::normalize(&[[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]]).unwrap();
        let deg = compute_degrees(&m);
        for (got, want) in deg.degrees.iter().zip([1.6, 1.8, 2.4]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }

        let same = EmbeddingMatrix::normalize(&[[0.3, 0.4]; 7]).unwrap();
        assert!(compute_degrees(&same)
            .degrees
            .iter()
            .all(|d| (d - 7.0).abs() < 1e-12));

        let antipodal = EmbeddingMatrix::normalize(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let deg = compute_degrees(&antipodal);
        assert_eq!(deg.raw, vec![0.0, 0.0]);
        assert_eq!(deg.degrees, vec![DEGREE_FLOOR, DEGREE_FLOOR]);
    }

    #[test]
    fn labels_map_to_dense_indices() {
        let mk = |id, l: &str| TextInstance::new(id, "t", Some(1), Some(l.to_string()), &WhitespaceTokens);
        let rows = [[1.0], [1.0], [1.0]];
        let c = Corpus::new(vec![mk(0, "sport"), mk(1, "tech"), mk(2, "sport")], &rows).unwrap();
        assert_eq!(c.label_indices(), Some(vec![0, 1, 0]));
    }
}
