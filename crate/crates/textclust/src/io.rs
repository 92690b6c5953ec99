//! Reading and writing corpus, embedding, selection, constraint and
//! assignment files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use textclust_core::oracle::{Constraint, ConstraintSet, Relation, Source};
use textclust_core::weighting::WeightedConstraintMatrix;
use textclust_core::{Corpus, QueryMode, TextInstance, TokenCounter};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<usize>,
}

fn label_string(v: serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) => Some(s),
        other => Some(other.to_string()),
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Parses each non-blank line of a JSON-lines file, reporting 1-based line
/// numbers on failure.
fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, &item).expect("records serialize");
        buf.push(b'\n');
    }
    write_bytes(path, &buf)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes");
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Text records in file order, token counts filled in by `tokenizer` where
/// the record has none.
pub fn load_texts(path: &Path, tokenizer: &dyn TokenCounter) -> Result<Vec<TextInstance>> {
    let records: Vec<CorpusRecord> = read_jsonl(path)?;
    if records.is_empty() {
        return Err(textclust_core::Error::EmptyCorpus.into());
    }
    let mut seen = std::collections::HashSet::new();
    for r in &records {
        if !seen.insert(r.id) {
            return Err(textclust_core::Error::DuplicateId(r.id).into());
        }
    }
    Ok(records
        .into_iter()
        .map(|r| TextInstance::new(r.id, r.text, r.tokens, r.label.and_then(label_string), tokenizer))
        .collect())
}

pub fn write_corpus(path: &Path, texts: &[TextInstance]) -> Result<()> {
    write_lines(
        path,
        texts.iter().map(|t| CorpusRecord {
            id: t.id,
            text: t.text.clone(),
            label: t.label.clone().map(serde_json::Value::String),
            tokens: Some(t.token_count),
        }),
    )
}

/// Reads embeddings as binary (`u32` n, `u32` d, then `n * d` `f32`, all
/// little-endian) when the file size matches that layout and the name does
/// not end in `.jsonl`/`.json`; otherwise as one JSON array per line.
pub fn load_embeddings(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let json_name = matches!(path.extension().and_then(|e| e.to_str()), Some("jsonl" | "json"));
    if !json_name {
        if let Some(rows) = decode_binary(&bytes) {
            return Ok(rows);
        }
        if path.extension().and_then(|e| e.to_str()) == Some("bin") {
            return Err(Error::parse(path, 0, "binary embedding size does not match its header"));
        }
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::parse(path, 0, "embedding file is neither binary nor UTF-8"))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        rows.push(row);
    }
    Ok(rows)
}

fn decode_binary(bytes: &[u8]) -> Option<Vec<Vec<f64>>> {
    let header = bytes.get(..8)?;
    let n = u32::from_le_bytes(header[..4].try_into().ok()?) as usize;
    let d = u32::from_le_bytes(header[4..].try_into().ok()?) as usize;
    let len = n.checked_mul(d)?.checked_mul(4)?.checked_add(8)?;
    if len != bytes.len() || d == 0 {
        return None;
    }
    let values: Vec<f64> = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
        .collect();
    Some(values.chunks(d).map(<[f64]>::to_vec).collect())
}

pub fn write_embeddings_binary<R: AsRef<[f64]>>(path: &Path, rows: &[R]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.as_ref().len());
    let mut buf = Vec::with_capacity(8 + rows.len() * d * 4);
    buf.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    for r in rows {
        for &v in r.as_ref() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    write_bytes(path, &buf)
}

pub fn write_embeddings_jsonl<R: AsRef<[f64]>>(path: &Path, rows: &[R]) -> Result<()> {
    write_lines(path, rows.iter().map(|r| r.as_ref()))
}

/// Loads texts and embeddings (aligned by line) into a corpus.
pub fn load_corpus(corpus: &Path, embeddings: &Path, tokenizer: &dyn TokenCounter) -> Result<Corpus> {
    let texts = load_texts(corpus, tokenizer)?;
    let rows = load_embeddings(embeddings)?;
    Ok(Corpus::new(texts, &rows)?)
}

/// Selected pairs or triplets as corpus ids together with the budget plan
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub mode: String,
    pub budget: u64,
    pub mean_tokens: f64,
    pub corpus_tokens: usize,
    pub n: usize,
    pub planned: usize,
    pub exhausted: bool,
    pub items: Vec<Vec<usize>>,
    pub scores: Vec<f64>,
}

impl SelectionFile {
    pub fn query_mode(&self) -> Result<QueryMode> {
        Ok(self.mode.parse()?)
    }

    pub fn pairs(&self) -> Result<Vec<(usize, usize)>> {
        self.items
            .iter()
            .map(|i| match i.as_slice() {
                &[a, b] => Ok((a, b)),
                _ => Err(Error::Config(format!("edge selection item {i:?} is not a pair"))),
            })
            .collect()
    }

    pub fn triples(&self) -> Result<Vec<(usize, usize, usize)>> {
        self.items
            .iter()
            .map(|i| match i.as_slice() {
                &[a, b, c] => Ok((a, b, c)),
                _ => Err(Error::Config(format!("triangle selection item {i:?} is not a triplet"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub a: usize,
    pub b: usize,
    pub rel: String,
    pub source: String,
}

pub fn write_constraints(path: &Path, set: &ConstraintSet) -> Result<()> {
    write_lines(
        path,
        set.iter().map(|c| ConstraintRecord {
            a: c.a,
            b: c.b,
            rel: c.relation.code().into(),
            source: c.source.as_str().into(),
        }),
    )
}

/// Reads a constraints file; a pair repeated with the opposite relation
/// keeps its first occurrence.
pub fn load_constraints(path: &Path) -> Result<ConstraintSet> {
    let mut set = ConstraintSet::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::parse(path, i + 1, m);
        let r: ConstraintRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let rel = Relation::from_code(&r.rel).ok_or_else(|| bad(format!("unknown relation {:?}", r.rel)))?;
        let source = Source::parse(&r.source).ok_or_else(|| bad(format!("unknown source {:?}", r.source)))?;
        let c = Constraint::new(r.a, r.b, rel, source, "").map_err(|e| bad(e.to_string()))?;
        set.insert(c);
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub id: usize,
    pub cluster: usize,
}

pub fn write_assignments(path: &Path, labels: &[usize]) -> Result<()> {
    write_lines(
        path,
        labels.iter().enumerate().map(|(id, &cluster)| AssignmentRecord { id, cluster }),
    )
}

pub fn load_assignments(path: &Path) -> Result<Vec<AssignmentRecord>> {
    read_jsonl(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub a: usize,
    pub b: usize,
    pub rel: String,
    pub weight: f64,
}

/// Dumps the non-zero entries of a weighted constraint matrix, one signed
/// weight per line.
pub fn write_weights(path: &Path, matrix: &WeightedConstraintMatrix) -> Result<()> {
    write_lines(
        path,
        matrix.entries().iter().map(|e| WeightRecord {
            a: e.a,
            b: e.b,
            rel: e.relation.code().into(),
            weight: e.signed(),
        }),
    )
}

pub fn append_line<T: Serialize>(file: &mut fs::File, path: &Path, item: &T) -> Result<()> {
    let mut line = serde_json::to_vec(item).expect("record serializes");
    line.push(b'\n');
    file.write_all(&line).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use textclust_core::WhitespaceTokens;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn corpus_records_round_trip() {
        let dir = tmp();
        let p = dir.path().join("c.jsonl");
        fs::write(
            &p,
            "{\"id\":1,\"text\":\"b c d\",\"label\":7}\n\n{\"id\":0,\"text\":\"a b\",\"label\":\"x\",\"tokens\":5}\n",
        )
        .unwrap();
        let texts = load_texts(&p, &WhitespaceTokens).unwrap();
        assert_eq!(texts[0].token_count, 3);
        assert_eq!(texts[0].label.as_deref(), Some("7"));
        assert_eq!(texts[1].token_count, 5);
        let q = dir.path().join("d.jsonl");
        write_corpus(&q, &texts).unwrap();
        assert_eq!(load_texts(&q, &WhitespaceTokens).unwrap(), texts);
    }

    #[test]
    fn corpus_errors_name_the_problem() {
        let dir = tmp();
        let p = dir.path().join("c.jsonl");
        fs::write(&p, "").unwrap();
        assert_eq!(load_texts(&p, &WhitespaceTokens).unwrap_err().to_string(), "empty corpus");
        fs::write(&p, "{\"id\":0,\"text\":\"a\"}\n{\"id\":0,\"text\":\"b\"}\n").unwrap();
        assert!(matches!(
            load_texts(&p, &WhitespaceTokens).unwrap_err(),
            Error::Core(textclust_core::Error::DuplicateId(0))
        ));
        fs::write(&p, "{\"id\":0,\"text\":\"a\"}\n{\"id\":1,\"text\"\n").unwrap();
        assert!(matches!(load_texts(&p, &WhitespaceTokens).unwrap_err(), Error::Parse { line: 2, .. }));
    }

    #[test]
    fn three_records_give_expected_corpus_size() {
        let dir = tmp();
        let c = dir.path().join("c.jsonl");
        let e = dir.path().join("e.jsonl");
        fs::write(
            &c,
            "{\"id\":0,\"text\":\"a b\"}\n{\"id\":1,\"text\":\"a b c\"}\n{\"id\":2,\"text\":\"a b c d e\"}\n",
        )
        .unwrap();
        fs::write(&e, "[1,0]\n[0,1]\n[3,4]\n").unwrap();
        let corpus = load_corpus(&c, &e, &WhitespaceTokens).unwrap();
        assert_eq!(corpus.total_tokens(), 10);
        assert!((corpus.mean_tokens() - 10.0 / 3.0).abs() < 1e-15);
        assert!((corpus.embeddings().row(2)[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn embeddings_binary_and_jsonl_agree() {
        let dir = tmp();
        let rows = vec![vec![0.5, -1.25, 2.0], vec![3.0, 0.0, 1.0]];
        let b = dir.path().join("e.bin");
        let j = dir.path().join("e.jsonl");
        write_embeddings_binary(&b, &rows).unwrap();
        write_embeddings_jsonl(&j, &rows).unwrap();
        let raw = fs::read(&b).unwrap();
        assert_eq!(&raw[..8], &[2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(raw.len(), 8 + 2 * 3 * 4);
        assert_eq!(load_embeddings(&b).unwrap(), rows);
        assert_eq!(load_embeddings(&j).unwrap(), rows);
        fs::write(&b, &raw[..raw.len() - 4]).unwrap();
        assert!(load_embeddings(&b).is_err());
    }

    #[test]
    fn constraints_round_trip_and_first_occurrence_wins() {
        let dir = tmp();
        let p = dir.path().join("k.jsonl");
        let mut set = ConstraintSet::new();
        set.insert(Constraint::new(3, 1, Relation::MustLink, Source::EdgeQuery, "Yes").unwrap());
        set.insert(Constraint::new(0, 2, Relation::CannotLink, Source::TriangleQuery, "b").unwrap());
        write_constraints(&p, &set).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), r#"{"a":1,"b":3,"rel":"ML","source":"edge-query"}"#);
        let back = load_constraints(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.relation(1, 3), Some(Relation::MustLink));

        fs::write(&p, format!("{text}{{\"a\":3,\"b\":1,\"rel\":\"CL\",\"source\":\"mock\"}}\n")).unwrap();
        let merged = load_constraints(&p).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged.conflicts(), 1);
        assert_eq!(merged.relation(1, 3), Some(Relation::MustLink));

        fs::write(&p, "{\"a\":1,\"b\":1,\"rel\":\"ML\",\"source\":\"mock\"}\n").unwrap();
        assert!(matches!(load_constraints(&p).unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn assignments_are_one_line_per_id() {
        let dir = tmp();
        let p = dir.path().join("a.jsonl");
        write_assignments(&p, &[2, 0, 1]).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "{\"id\":0,\"cluster\":2}\n{\"id\":1,\"cluster\":0}\n{\"id\":2,\"cluster\":1}\n"
        );
        assert_eq!(load_assignments(&p).unwrap()[2], AssignmentRecord { id: 2, cluster: 1 });
    }
}
