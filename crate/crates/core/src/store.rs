//! Exact in-memory cosine top-k search over document embeddings.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::enhancer::EnhancerParams;
use crate::error::{Error, Result};
use crate::linalg::{cosine, l2_norm};
use crate::losses::report_score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Modality::Text => "text",
            Modality::Image => "image",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub doc_id: String,
    pub modality: Modality,
    pub lesson_id: String,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    /// Cosine between raw embeddings.
    Raw,
    /// Cosine between enhanced embeddings.
    Enhanced(&'a EnhancerParams),
    /// Enhanced scoring with document embeddings precomputed by
    /// [`VectorStore::enhanced_embeddings`] for the same parameters.
    EnhancedCached(&'a EnhancerParams, &'a [Vec<f64>]),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub doc_id: String,
    pub raw_cosine: f64,
    pub enhanced_score: Option<f64>,
    pub report_score: Option<f64>,
}

impl RankedEntry {
    /// The score the list is sorted by.
    pub fn active_score(&self) -> f64 {
        self.enhanced_score.unwrap_or(self.raw_cosine)
    }
}

/// Sorted descending by the active score, ties by ascending `doc_id`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.doc_id.as_str()).collect()
    }

    pub fn truncated(&self, k: usize) -> RankedList {
        RankedList {
            entries: self.entries.iter().take(k).cloned().collect(),
        }
    }
}

pub(crate) fn rank_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.active_score()
        .total_cmp(&a.active_score())
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

#[derive(Debug, Clone, Default)]
pub struct VectorStore {
    dim: Option<usize>,
    docs: Vec<DocRecord>,
    index: HashMap<String, usize>,
}

impl VectorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dim(dim: usize) -> Self {
        VectorStore {
            dim: Some(dim),
            ..Default::default()
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    pub fn get(&self, doc_id: &str) -> Option<&DocRecord> {
        self.index.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn insert(&mut self, rec: DocRecord) -> Result<()> {
        if self.index.contains_key(&rec.doc_id) {
            return Err(Error::DuplicateId(rec.doc_id));
        }
        if let Some(dim) = self.dim {
            if rec.embedding.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: rec.embedding.len(),
                });
            }
        }
        if rec.embedding.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("embedding of '{}'", rec.doc_id)));
        }
        if l2_norm(&rec.embedding) == 0.0 {
            return Err(Error::UndefinedSimilarity);
        }
        self.dim = Some(rec.embedding.len());
        self.index.insert(rec.doc_id.clone(), self.docs.len());
        self.docs.push(rec);
        Ok(())
    }

    /// Enhanced embedding of every document, in insertion order.
    pub fn enhanced_embeddings(&self, params: &EnhancerParams) -> Result<Vec<Vec<f64>>> {
        self.docs
            .iter()
            .map(|d| params.enhance(&d.embedding))
            .collect()
    }

    /// Exact top-k by full scan. Returns fewer than `k` entries when the
    /// filtered store is smaller.
    pub fn topk(
        &self,
        query: &[f64],
        k: usize,
        modality: Option<Modality>,
        scorer: Scorer<'_>,
    ) -> Result<RankedList> {
        if k == 0 {
            return Err(Error::OutOfRange("k must be at least 1".into()));
        }
        if let Some(dim) = self.dim {
            if query.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: query.len(),
                });
            }
        }
        let enhanced_query = match scorer {
            Scorer::Raw => None,
            Scorer::Enhanced(p) => Some((p, p.enhance(query)?, None)),
            Scorer::EnhancedCached(p, cached) => {
                if cached.len() != self.docs.len() {
                    return Err(Error::DimMismatch {
                        expected: self.docs.len(),
                        actual: cached.len(),
                    });
                }
                Some((p, p.enhance(query)?, Some(cached)))
            }
        };
        let mut entries = Vec::new();
        for (i, doc) in self
            .docs
            .iter()
            .enumerate()
            .filter(|(_, d)| modality.is_none_or(|m| d.modality == m))
        {
            let raw_cosine = cosine(query, &doc.embedding)?;
            let (enhanced_score, report) = match &enhanced_query {
                None => (None, None),
                Some((p, zq, cached)) => {
                    let s = match cached {
                        Some(c) => cosine(zq, &c[i])?,
                        None => cosine(zq, &p.enhance(&doc.embedding)?)?,
                    };
                    (Some(s), Some(report_score(s)?))
                }
            };
            entries.push(RankedEntry {
                doc_id: doc.doc_id.clone(),
                raw_cosine,
                enhanced_score,
                report_score: report,
            });
        }
        if entries.is_empty() {
            return Err(Error::EmptyStore);
        }
        entries.sort_by(rank_order);
        entries.truncate(k);
        Ok(RankedList { entries })
    }
}
