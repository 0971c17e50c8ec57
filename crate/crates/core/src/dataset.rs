//! Corpus files, loading with referential validation, query fusion and
//! lesson-derived relevance.
//!
//! A corpus directory holds four JSONL files, one JSON object per line:
//!
//! | file              | record                                                              |
//! |-------------------|---------------------------------------------------------------------|
//! | `embeddings.jsonl`| `{"id","kind":"doc"\|"query_text"\|"query_image","modality","lesson_id","dim","values"}` |
//! | `queries.jsonl`   | `{"query_id","qtype","choice_count","correct_index","lesson_id"}`   |
//! | `logits.jsonl`    | `{"query_id","doc_id","choice_logits"}`                             |
//! | `splits.jsonl`    | a single `{"train","validation","test"}` object                     |
//!
//! Unknown fields are ignored and reported as warnings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::linalg::{l2_norm, normalize};
use crate::metrics::QueryJudgment;
use crate::policy::QuestionType;
use crate::store::{DocRecord, Modality, VectorStore};

pub const EMBEDDINGS_FILE: &str = "embeddings.jsonl";
pub const QUERIES_FILE: &str = "queries.jsonl";
pub const LOGITS_FILE: &str = "logits.jsonl";
pub const SPLITS_FILE: &str = "splits.jsonl";

/// Integrity failures, one variant per rule.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("{file}:{line}: parse error: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}:{line}: dangling reference to {what} '{id}'")]
    DanglingReference {
        file: String,
        line: usize,
        what: &'static str,
        id: String,
    },

    #[error("{file}:{line}: dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch {
        file: String,
        line: usize,
        expected: usize,
        actual: usize,
    },

    #[error("{file}:{line}: duplicate id '{id}'")]
    DuplicateId {
        file: String,
        line: usize,
        id: String,
    },

    #[error("{file}:{line}: {message}")]
    Invalid {
        file: String,
        line: usize,
        message: String,
    },

    #[error("split manifest: {0}")]
    Split(String),
}

impl DatasetError {
    /// Short rule name used in validation reports.
    pub fn rule(&self) -> &'static str {
        match self {
            DatasetError::MissingFile(_) => "missing-file",
            DatasetError::Parse { .. } => "parse",
            DatasetError::DanglingReference { .. } => "dangling-reference",
            DatasetError::DimMismatch { .. } => "dim-mismatch",
            DatasetError::DuplicateId { .. } => "duplicate-id",
            DatasetError::Invalid { .. } => "invalid-record",
            DatasetError::Split(_) => "split-manifest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: String,
    pub qtype: QuestionType,
    pub text_embedding: Vec<f64>,
    pub image_embedding: Option<Vec<f64>>,
    pub choice_count: usize,
    pub correct_index: usize,
    pub lesson_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitRecord {
    pub query_id: String,
    pub doc_id: String,
    pub choice_logits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Unknown {
                kind: "split",
                name: other.to_string(),
            }),
        }
    }
}

impl SplitManifest {
    pub fn ids(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}

/// Unit-norm query embedding. With an image, the normalized mean of the two
/// unit-normalized vectors.
pub fn fuse_query_embedding(text_emb: &[f64], image_emb: Option<&[f64]>) -> Result<Vec<f64>> {
    let t = normalize(text_emb)?;
    let Some(image) = image_emb else {
        return Ok(t);
    };
    if image.len() != t.len() {
        return Err(Error::DimMismatch {
            expected: t.len(),
            actual: image.len(),
        });
    }
    let i = normalize(image)?;
    let mean: Vec<f64> = t.iter().zip(&i).map(|(a, b)| 0.5 * (a + b)).collect();
    normalize(&mean)
}

/// Documents sharing the query's lesson. `None` when there are none, which
/// makes the query unevaluable.
pub fn relevance_labels<'a>(
    query: &QueryRecord,
    docs: impl IntoIterator<Item = &'a DocRecord>,
) -> Option<QueryJudgment> {
    let relevant: Vec<&str> = docs
        .into_iter()
        .filter(|d| d.lesson_id == query.lesson_id)
        .map(|d| d.doc_id.as_str())
        .collect();
    if relevant.is_empty() {
        None
    } else {
        Some(QueryJudgment::new(query.query_id.clone(), relevant))
    }
}

/// A validated, immutable corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    docs: Vec<DocRecord>,
    queries: Vec<QueryRecord>,
    logits: Vec<LogitRecord>,
    splits: SplitManifest,
    store: VectorStore,
    query_index: HashMap<String, usize>,
    logit_index: HashMap<(String, String), usize>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs
            && self.queries == other.queries
            && self.logits == other.logits
            && self.splits == other.splits
    }
}

const IN_MEMORY: &str = "<memory>";

fn invalid(file: &str, line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Invalid {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

impl Corpus {
    /// Validates and indexes in-memory records.
    pub fn new(
        docs: Vec<DocRecord>,
        queries: Vec<QueryRecord>,
        logits: Vec<LogitRecord>,
        splits: SplitManifest,
    ) -> std::result::Result<Self, DatasetError> {
        let f = IN_MEMORY;
        let mut dim: Option<usize> = None;
        let mut check_dim = |actual: usize, line: usize| -> std::result::Result<(), DatasetError> {
            match dim {
                Some(expected) if expected != actual => Err(DatasetError::DimMismatch {
                    file: f.into(),
                    line,
                    expected,
                    actual,
                }),
                _ => {
                    dim = Some(actual);
                    Ok(())
                }
            }
        };

        let mut store = VectorStore::new();
        for (i, d) in docs.iter().enumerate() {
            check_dim(d.embedding.len(), i + 1)?;
            store.insert(d.clone()).map_err(|e| match e {
                Error::DuplicateId(id) => DatasetError::DuplicateId {
                    file: f.into(),
                    line: i + 1,
                    id,
                },
                other => invalid(f, i + 1, format!("document '{}': {other}", d.doc_id)),
            })?;
        }

        let mut query_index = HashMap::new();
        for (i, q) in queries.iter().enumerate() {
            if query_index.insert(q.query_id.clone(), i).is_some() {
                return Err(DatasetError::DuplicateId {
                    file: f.into(),
                    line: i + 1,
                    id: q.query_id.clone(),
                });
            }
            check_dim(q.text_embedding.len(), i + 1)?;
            if let Some(img) = &q.image_embedding {
                check_dim(img.len(), i + 1)?;
            }
            if q.choice_count < 2 || q.correct_index >= q.choice_count {
                return Err(invalid(
                    f,
                    i + 1,
                    format!(
                        "query '{}': correct_index {} with {} choices",
                        q.query_id, q.correct_index, q.choice_count
                    ),
                ));
            }
            let finite_nonzero = |v: &[f64]| v.iter().all(|x| x.is_finite()) && l2_norm(v) > 0.0;
            if !finite_nonzero(&q.text_embedding)
                || q.image_embedding
                    .as_deref()
                    .is_some_and(|v| !finite_nonzero(v))
            {
                return Err(invalid(
                    f,
                    i + 1,
                    format!("query '{}': zero-norm or non-finite embedding", q.query_id),
                ));
            }
        }

        let mut logit_index = HashMap::new();
        for (i, l) in logits.iter().enumerate() {
            let Some(&qi) = query_index.get(&l.query_id) else {
                return Err(DatasetError::DanglingReference {
                    file: f.into(),
                    line: i + 1,
                    what: "query",
                    id: l.query_id.clone(),
                });
            };
            if store.get(&l.doc_id).is_none() {
                return Err(DatasetError::DanglingReference {
                    file: f.into(),
                    line: i + 1,
                    what: "document",
                    id: l.doc_id.clone(),
                });
            }
            let k = queries[qi].choice_count;
            if l.choice_logits.len() != k {
                return Err(invalid(
                    f,
                    i + 1,
                    format!(
                        "logits for ('{}', '{}') have {} choices, query has {k}",
                        l.query_id,
                        l.doc_id,
                        l.choice_logits.len()
                    ),
                ));
            }
            if l.choice_logits.iter().any(|v| !v.is_finite()) {
                return Err(invalid(f, i + 1, "non-finite choice logit"));
            }
            if logit_index
                .insert((l.query_id.clone(), l.doc_id.clone()), i)
                .is_some()
            {
                return Err(DatasetError::DuplicateId {
                    file: f.into(),
                    line: i + 1,
                    id: format!("{}/{}", l.query_id, l.doc_id),
                });
            }
        }

        validate_splits(&splits, &query_index)?;

        Ok(Corpus {
            docs,
            queries,
            logits,
            splits,
            store,
            query_index,
            logit_index,
        })
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    pub fn queries(&self) -> &[QueryRecord] {
        &self.queries
    }

    pub fn logits(&self) -> &[LogitRecord] {
        &self.logits
    }

    pub fn splits(&self) -> &SplitManifest {
        &self.splits
    }

    pub fn store(&self) -> &VectorStore {
        &self.store
    }

    pub fn dim(&self) -> Option<usize> {
        self.store
            .dim()
            .or_else(|| self.queries.first().map(|q| q.text_embedding.len()))
    }

    pub fn query(&self, query_id: &str) -> Option<&QueryRecord> {
        self.query_index.get(query_id).map(|&i| &self.queries[i])
    }

    pub fn logit(&self, query_id: &str, doc_id: &str) -> Option<&LogitRecord> {
        self.logit_index
            .get(&(query_id.to_string(), doc_id.to_string()))
            .map(|&i| &self.logits[i])
    }

    pub fn split_queries(&self, split: Split) -> Vec<&QueryRecord> {
        self.splits
            .ids(split)
            .iter()
            .filter_map(|id| self.query(id))
            .collect()
    }

    /// Loads and validates a corpus directory. Warnings (unknown fields) are
    /// returned alongside.
    pub fn load(dir: impl AsRef<Path>) -> Result<(Corpus, Vec<String>)> {
        load_corpus(dir.as_ref())
    }

    /// Canonical file contents, keyed by file name.
    pub fn to_files(&self) -> Result<Vec<(&'static str, String)>> {
        let mut emb = String::new();
        for d in &self.docs {
            push_line(
                &mut emb,
                &EmbeddingLine {
                    id: d.doc_id.clone(),
                    kind: EmbeddingKind::Doc,
                    modality: d.modality,
                    lesson_id: d.lesson_id.clone(),
                    dim: d.embedding.len(),
                    values: d.embedding.clone(),
                    extra: BTreeMap::new(),
                },
            )?;
        }
        for q in &self.queries {
            push_line(
                &mut emb,
                &EmbeddingLine {
                    id: q.query_id.clone(),
                    kind: EmbeddingKind::QueryText,
                    modality: Modality::Text,
                    lesson_id: q.lesson_id.clone(),
                    dim: q.text_embedding.len(),
                    values: q.text_embedding.clone(),
                    extra: BTreeMap::new(),
                },
            )?;
            if let Some(img) = &q.image_embedding {
                push_line(
                    &mut emb,
                    &EmbeddingLine {
                        id: q.query_id.clone(),
                        kind: EmbeddingKind::QueryImage,
                        modality: Modality::Image,
                        lesson_id: q.lesson_id.clone(),
                        dim: img.len(),
                        values: img.clone(),
                        extra: BTreeMap::new(),
                    },
                )?;
            }
        }
        let mut queries = String::new();
        for q in &self.queries {
            push_line(
                &mut queries,
                &QueryLine {
                    query_id: q.query_id.clone(),
                    qtype: q.qtype,
                    choice_count: q.choice_count,
                    correct_index: q.correct_index,
                    lesson_id: q.lesson_id.clone(),
                    extra: BTreeMap::new(),
                },
            )?;
        }
        let mut logits = String::new();
        for l in &self.logits {
            push_line(&mut logits, l)?;
        }
        let mut splits = String::new();
        push_line(&mut splits, &self.splits)?;
        Ok(vec![
            (EMBEDDINGS_FILE, emb),
            (QUERIES_FILE, queries),
            (LOGITS_FILE, logits),
            (SPLITS_FILE, splits),
        ])
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in self.to_files()? {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical serialization of all four files.
    pub fn fingerprint(&self) -> Result<[u8; 32]> {
        let mut h = Sha256::new();
        for (name, contents) in self.to_files()? {
            h.update(name.as_bytes());
            h.update((contents.len() as u64).to_le_bytes());
            h.update(contents.as_bytes());
        }
        Ok(h.finalize().into())
    }
}

fn validate_splits(
    splits: &SplitManifest,
    queries: &HashMap<String, usize>,
) -> std::result::Result<(), DatasetError> {
    if splits.train.is_empty() {
        return Err(DatasetError::Split("train split is empty".into()));
    }
    let mut seen: HashMap<&str, &str> = HashMap::new();
    for (name, ids) in [
        ("train", &splits.train),
        ("validation", &splits.validation),
        ("test", &splits.test),
    ] {
        for id in ids {
            if !queries.contains_key(id) {
                return Err(DatasetError::Split(format!(
                    "{name} lists unknown query '{id}'"
                )));
            }
            if let Some(prev) = seen.insert(id, name) {
                return Err(DatasetError::Split(format!(
                    "query '{id}' appears in both {prev} and {name}"
                )));
            }
        }
    }
    Ok(())
}

fn push_line<T: Serialize>(out: &mut String, value: &T) -> Result<()> {
    out.push_str(&serde_json::to_string(value)?);
    out.push('\n');
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EmbeddingKind {
    Doc,
    QueryText,
    QueryImage,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingLine {
    id: String,
    kind: EmbeddingKind,
    modality: Modality,
    lesson_id: String,
    dim: usize,
    values: Vec<f64>,
    #[serde(flatten, skip_serializing)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct QueryLine {
    query_id: String,
    qtype: QuestionType,
    choice_count: usize,
    correct_index: usize,
    lesson_id: String,
    #[serde(flatten, skip_serializing)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct LogitLine {
    query_id: String,
    doc_id: String,
    choice_logits: Vec<f64>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Deserialize)]
struct SplitLine {
    train: Vec<String>,
    #[serde(default)]
    validation: Vec<String>,
    #[serde(default)]
    test: Vec<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

/// Parses every non-blank line of a JSONL file as `T`, with 1-based line numbers.
fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let f = fs::File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Dataset(DatasetError::MissingFile(path.to_path_buf()))
        } else {
            Error::io(path, e)
        }
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            file: file_name.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

fn warn_extra(
    warnings: &mut Vec<String>,
    file: &str,
    line: usize,
    extra: &BTreeMap<String, serde_json::Value>,
) {
    for key in extra.keys() {
        let msg = format!("{file}:{line}: ignoring unknown field '{key}'");
        log::warn!("{msg}");
        warnings.push(msg);
    }
}

fn load_corpus(dir: &Path) -> Result<(Corpus, Vec<String>)> {
    let mut warnings = Vec::new();

    let query_lines: Vec<(usize, QueryLine)> = read_jsonl(&dir.join(QUERIES_FILE))?;
    let mut query_meta: HashMap<String, (usize, QueryLine)> = HashMap::new();
    let mut query_order = Vec::new();
    for (line, q) in query_lines {
        warn_extra(&mut warnings, QUERIES_FILE, line, &q.extra);
        if query_meta.contains_key(&q.query_id) {
            return Err(DatasetError::DuplicateId {
                file: QUERIES_FILE.into(),
                line,
                id: q.query_id,
            }
            .into());
        }
        if q.choice_count < 2 || q.correct_index >= q.choice_count {
            return Err(invalid(
                QUERIES_FILE,
                line,
                format!(
                    "correct_index {} with {} choices",
                    q.correct_index, q.choice_count
                ),
            )
            .into());
        }
        query_order.push(q.query_id.clone());
        query_meta.insert(q.query_id.clone(), (line, q));
    }

    let emb_lines: Vec<(usize, EmbeddingLine)> = read_jsonl(&dir.join(EMBEDDINGS_FILE))?;
    let mut dim: Option<usize> = None;
    let mut docs = Vec::new();
    let mut doc_ids = HashSet::new();
    let mut text_emb: HashMap<String, Vec<f64>> = HashMap::new();
    let mut image_emb: HashMap<String, Vec<f64>> = HashMap::new();
    for (line, e) in emb_lines {
        warn_extra(&mut warnings, EMBEDDINGS_FILE, line, &e.extra);
        if e.values.len() != e.dim {
            return Err(DatasetError::DimMismatch {
                file: EMBEDDINGS_FILE.into(),
                line,
                expected: e.dim,
                actual: e.values.len(),
            }
            .into());
        }
        match dim {
            Some(d) if d != e.dim => {
                return Err(DatasetError::DimMismatch {
                    file: EMBEDDINGS_FILE.into(),
                    line,
                    expected: d,
                    actual: e.dim,
                }
                .into())
            }
            _ => dim = Some(e.dim),
        }
        if e.values.iter().any(|v| !v.is_finite()) || l2_norm(&e.values) == 0.0 {
            return Err(invalid(
                EMBEDDINGS_FILE,
                line,
                format!("'{}': zero-norm or non-finite embedding", e.id),
            )
            .into());
        }
        let dup = |id: String| DatasetError::DuplicateId {
            file: EMBEDDINGS_FILE.into(),
            line,
            id,
        };
        match e.kind {
            EmbeddingKind::Doc => {
                if !doc_ids.insert(e.id.clone()) {
                    return Err(dup(e.id).into());
                }
                docs.push(DocRecord {
                    doc_id: e.id,
                    modality: e.modality,
                    lesson_id: e.lesson_id,
                    embedding: e.values,
                });
            }
            EmbeddingKind::QueryText | EmbeddingKind::QueryImage => {
                if !query_meta.contains_key(&e.id) {
                    return Err(DatasetError::DanglingReference {
                        file: EMBEDDINGS_FILE.into(),
                        line,
                        what: "query",
                        id: e.id,
                    }
                    .into());
                }
                let map = if e.kind == EmbeddingKind::QueryText {
                    &mut text_emb
                } else {
                    &mut image_emb
                };
                if map.contains_key(&e.id) {
                    return Err(dup(e.id).into());
                }
                map.insert(e.id, e.values);
            }
        }
    }

    let mut queries = Vec::with_capacity(query_order.len());
    for id in &query_order {
        let (line, meta) = query_meta.remove(id).expect("indexed above");
        let text = text_emb.remove(id).ok_or_else(|| {
            invalid(
                QUERIES_FILE,
                line,
                format!("query '{id}' has no query_text embedding"),
            )
        })?;
        queries.push(QueryRecord {
            query_id: meta.query_id,
            qtype: meta.qtype,
            text_embedding: text,
            image_embedding: image_emb.remove(id),
            choice_count: meta.choice_count,
            correct_index: meta.correct_index,
            lesson_id: meta.lesson_id,
        });
    }
    let choice_counts: HashMap<&str, usize> = queries
        .iter()
        .map(|q| (q.query_id.as_str(), q.choice_count))
        .collect();

    let logit_lines: Vec<(usize, LogitLine)> = read_jsonl(&dir.join(LOGITS_FILE))?;
    let mut logits = Vec::with_capacity(logit_lines.len());
    let mut seen_pairs = HashSet::new();
    for (line, l) in logit_lines {
        warn_extra(&mut warnings, LOGITS_FILE, line, &l.extra);
        let Some(&k) = choice_counts.get(l.query_id.as_str()) else {
            return Err(DatasetError::DanglingReference {
                file: LOGITS_FILE.into(),
                line,
                what: "query",
                id: l.query_id,
            }
            .into());
        };
        if !doc_ids.contains(&l.doc_id) {
            return Err(DatasetError::DanglingReference {
                file: LOGITS_FILE.into(),
                line,
                what: "document",
                id: l.doc_id,
            }
            .into());
        }
        if l.choice_logits.len() != k {
            return Err(invalid(
                LOGITS_FILE,
                line,
                format!(
                    "{} choice logits, query has {k} choices",
                    l.choice_logits.len()
                ),
            )
            .into());
        }
        if l.choice_logits.iter().any(|v| !v.is_finite()) {
            return Err(invalid(LOGITS_FILE, line, "non-finite choice logit").into());
        }
        if !seen_pairs.insert((l.query_id.clone(), l.doc_id.clone())) {
            return Err(DatasetError::DuplicateId {
                file: LOGITS_FILE.into(),
                line,
                id: format!("{}/{}", l.query_id, l.doc_id),
            }
            .into());
        }
        logits.push(LogitRecord {
            query_id: l.query_id,
            doc_id: l.doc_id,
            choice_logits: l.choice_logits,
        });
    }

    let split_lines: Vec<(usize, SplitLine)> = read_jsonl(&dir.join(SPLITS_FILE))?;
    let [(line, s)] = <[_; 1]>::try_from(split_lines).map_err(|v: Vec<_>| {
        DatasetError::Split(format!("expected exactly one object, found {}", v.len()))
    })?;
    warn_extra(&mut warnings, SPLITS_FILE, line, &s.extra);
    let splits = SplitManifest {
        train: s.train,
        validation: s.validation,
        test: s.test,
    };

    let corpus = Corpus::new(docs, queries, logits, splits)?;
    Ok((corpus, warnings))
}
