//! Binary-relevance retrieval metrics.
//!
//! MRR and MAP look at the whole ranking; every other metric is cut at `k`.

use std::collections::BTreeSet;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::cosine;
use crate::store::{RankedList, VectorStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryJudgment {
    pub query_id: String,
    pub relevant: BTreeSet<String>,
}

impl QueryJudgment {
    pub fn new<I, S>(query_id: impl Into<String>, relevant: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        QueryJudgment {
            query_id: query_id.into(),
            relevant: relevant.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_relevant(&self, doc_id: &str) -> bool {
        self.relevant.contains(doc_id)
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.relevant.is_empty() {
            return Err(Error::Empty("relevance judgment"));
        }
        Ok(())
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    Ok(())
}

fn hits_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> usize {
    ranked
        .iter()
        .take(k)
        .filter(|id| judgment.is_relevant(id))
        .count()
}

pub fn reciprocal_rank(ranked: &[&str], judgment: &QueryJudgment) -> f64 {
    ranked
        .iter()
        .position(|id| judgment.is_relevant(id))
        .map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

pub fn average_precision(ranked: &[&str], judgment: &QueryJudgment) -> Result<f64> {
    judgment.require_nonempty()?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranked.iter().enumerate() {
        if judgment.is_relevant(id) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / judgment.relevant.len() as f64)
}

pub fn ndcg_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> Result<f64> {
    check_k(k)?;
    judgment.require_nonempty()?;
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, id)| judgment.is_relevant(id))
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal: f64 = (1..=judgment.relevant.len().min(k)).map(discount).sum();
    Ok(dcg / ideal)
}

pub fn recall_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> Result<f64> {
    check_k(k)?;
    judgment.require_nonempty()?;
    Ok(hits_at_k(ranked, judgment, k) as f64 / judgment.relevant.len() as f64)
}

/// Hits in the top `k` divided by `k`, even when fewer than `k` were retrieved.
pub fn precision_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> Result<f64> {
    check_k(k)?;
    judgment.require_nonempty()?;
    Ok(hits_at_k(ranked, judgment, k) as f64 / k as f64)
}

pub fn f1_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> Result<f64> {
    let p = precision_at_k(ranked, judgment, k)?;
    let r = recall_at_k(ranked, judgment, k)?;
    if p + r == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * p * r / (p + r))
    }
}

pub fn hit_rate_at_k(ranked: &[&str], judgment: &QueryJudgment, k: usize) -> Result<f64> {
    check_k(k)?;
    judgment.require_nonempty()?;
    Ok(if hits_at_k(ranked, judgment, k) > 0 {
        1.0
    } else {
        0.0
    })
}

/// Mean raw cosine between the query and its top-`k` retrieved documents
/// (or all of them, when fewer than `k`).
pub fn mean_cosine(
    ranked: &RankedList,
    query_emb: &[f64],
    store: &VectorStore,
    k: usize,
) -> Result<f64> {
    check_k(k)?;
    if ranked.is_empty() {
        return Err(Error::Empty("ranking"));
    }
    let top = &ranked.entries[..k.min(ranked.len())];
    let mut sum = 0.0;
    for e in top {
        let doc = store.get(&e.doc_id).ok_or_else(|| Error::Unknown {
            kind: "document",
            name: e.doc_id.clone(),
        })?;
        sum += cosine(query_emb, &doc.embedding)?;
    }
    Ok(sum / top.len() as f64)
}

/// Metric values for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub query_id: String,
    pub mrr: f64,
    pub map: f64,
    pub ndcg_at_k: f64,
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub f1_at_k: f64,
    pub hit_rate_at_k: f64,
    pub mean_cosine: f64,
}

impl QueryMetrics {
    pub fn compute(
        ranked: &RankedList,
        judgment: &QueryJudgment,
        query_emb: &[f64],
        store: &VectorStore,
        k: usize,
    ) -> Result<Self> {
        let ids = ranked.ids();
        Ok(QueryMetrics {
            query_id: judgment.query_id.clone(),
            mrr: reciprocal_rank(&ids, judgment),
            map: average_precision(&ids, judgment)?,
            ndcg_at_k: ndcg_at_k(&ids, judgment, k)?,
            recall_at_k: recall_at_k(&ids, judgment, k)?,
            precision_at_k: precision_at_k(&ids, judgment, k)?,
            f1_at_k: f1_at_k(&ids, judgment, k)?,
            hit_rate_at_k: hit_rate_at_k(&ids, judgment, k)?,
            mean_cosine: mean_cosine(ranked, query_emb, store, k)?,
        })
    }

    pub const CSV_HEADER: &'static str =
        "query_id,mrr,map,ndcg,recall,precision,f1,hit_rate,mean_cosine";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.query_id,
            self.mrr,
            self.map,
            self.ndcg_at_k,
            self.recall_at_k,
            self.precision_at_k,
            self.f1_at_k,
            self.hit_rate_at_k,
            self.mean_cosine
        )
    }
}

/// Corpus-level means. Serializes `@k` fields with the cut in the name,
/// e.g. `ndcg_at_10`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mrr: f64,
    pub map: f64,
    pub ndcg_at_k: f64,
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub f1_at_k: f64,
    pub hit_rate_at_k: f64,
    pub mean_cosine: f64,
    pub k: usize,
    pub query_count: usize,
    /// Queries without any relevant document, excluded from the means.
    pub unevaluable_count: usize,
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let k = self.k;
        let mut m = serializer.serialize_map(Some(11))?;
        m.serialize_entry("mrr", &self.mrr)?;
        m.serialize_entry("map", &self.map)?;
        m.serialize_entry(&format!("ndcg_at_{k}"), &self.ndcg_at_k)?;
        m.serialize_entry(&format!("recall_at_{k}"), &self.recall_at_k)?;
        m.serialize_entry(&format!("precision_at_{k}"), &self.precision_at_k)?;
        m.serialize_entry(&format!("f1_at_{k}"), &self.f1_at_k)?;
        m.serialize_entry(&format!("hit_rate_at_{k}"), &self.hit_rate_at_k)?;
        m.serialize_entry("mean_cosine", &self.mean_cosine)?;
        m.serialize_entry("k", &self.k)?;
        m.serialize_entry("query_count", &self.query_count)?;
        m.serialize_entry("unevaluable_count", &self.unevaluable_count)?;
        m.end()
    }
}

/// Unweighted mean of each field. Values are summed in sorted order so the
/// result does not depend on input order.
pub fn aggregate(per_query: &[QueryMetrics], k: usize) -> Result<MetricsReport> {
    if per_query.is_empty() {
        return Err(Error::Empty("per-query metrics"));
    }
    let n = per_query.len() as f64;
    let mean = |f: fn(&QueryMetrics) -> f64| {
        let mut vals: Vec<f64> = per_query.iter().map(f).collect();
        vals.sort_by(f64::total_cmp);
        vals.iter().sum::<f64>() / n
    };
    Ok(MetricsReport {
        mrr: mean(|q| q.mrr),
        map: mean(|q| q.map),
        ndcg_at_k: mean(|q| q.ndcg_at_k),
        recall_at_k: mean(|q| q.recall_at_k),
        precision_at_k: mean(|q| q.precision_at_k),
        f1_at_k: mean(|q| q.f1_at_k),
        hit_rate_at_k: mean(|q| q.hit_rate_at_k),
        mean_cosine: mean(|q| q.mean_cosine),
        k,
        query_count: per_query.len(),
        unevaluable_count: 0,
    })
}
