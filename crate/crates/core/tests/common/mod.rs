//! Brute-force reference implementations shared by the integration tests.
//! Written from the metric definitions, without calling the library's metric
//! or ranking code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use jetr_core::dataset::fuse_query_embedding;
use jetr_core::synth::signal_block;
use jetr_core::{Corpus, Modality, Split, SyntheticConfig};

pub fn cos(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// `[mrr, map, ndcg, recall, precision, f1, hit]` for one ranking.
pub fn oracle_metrics(ranked: &[String], relevant: &BTreeSet<String>, k: usize) -> [f64; 7] {
    let rel = |i: usize| relevant.contains(&ranked[i]);
    let mut rr = 0.0;
    for i in 0..ranked.len() {
        if rel(i) {
            rr = 1.0 / (i + 1) as f64;
            break;
        }
    }
    let mut found = 0;
    let mut ap = 0.0;
    for i in 0..ranked.len() {
        if rel(i) {
            found += 1;
            ap += found as f64 / (i + 1) as f64;
        }
    }
    ap /= relevant.len() as f64;
    let top = k.min(ranked.len());
    let mut dcg = 0.0;
    let mut hits = 0;
    for i in 0..top {
        if rel(i) {
            dcg += 1.0 / ((i + 2) as f64).log2();
            hits += 1;
        }
    }
    let mut idcg = 0.0;
    for i in 0..relevant.len().min(k) {
        idcg += 1.0 / ((i + 2) as f64).log2();
    }
    let recall = hits as f64 / relevant.len() as f64;
    let precision = hits as f64 / k as f64;
    let f1 = if hits == 0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let hit = if hits > 0 { 1.0 } else { 0.0 };
    [rr, ap, dcg / idcg, recall, precision, f1, hit]
}

/// Ranks `(id, score)` pairs descending by score, ties by ascending id.
pub fn brute_sort(mut scored: Vec<(String, f64)>) -> Vec<String> {
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(id, _)| id).collect()
}

/// Mean nDCG@k and MRR over the evaluable queries of `split`, ranking the
/// text documents with `score(fused_query, doc_embedding)`.
pub fn brute_eval(
    corpus: &Corpus,
    split: Split,
    k: usize,
    score: impl Fn(&[f64], &[f64]) -> f64,
) -> (f64, f64) {
    let mut ndcg = 0.0;
    let mut mrr = 0.0;
    let mut n = 0;
    for q in corpus.split_queries(split) {
        let relevant: BTreeSet<String> = corpus
            .docs()
            .iter()
            .filter(|d| d.modality == Modality::Text && d.lesson_id == q.lesson_id)
            .map(|d| d.doc_id.clone())
            .collect();
        if relevant.is_empty() {
            continue;
        }
        let fused = fuse_query_embedding(&q.text_embedding, q.image_embedding.as_deref()).unwrap();
        let scored = corpus
            .docs()
            .iter()
            .filter(|d| d.modality == Modality::Text)
            .map(|d| (d.doc_id.clone(), score(&fused, &d.embedding)))
            .collect();
        let m = oracle_metrics(&brute_sort(scored), &relevant, k);
        mrr += m[0];
        ndcg += m[2];
        n += 1;
    }
    (ndcg / n as f64, mrr / n as f64)
}

/// Raw-cosine baseline.
pub fn raw_baseline(corpus: &Corpus, split: Split, k: usize) -> (f64, f64) {
    brute_eval(corpus, split, k, cos)
}

/// Ranking by cosine of the planted signal blocks: the recoverable ceiling.
pub fn signal_ceiling(
    cfg: &SyntheticConfig,
    corpus: &Corpus,
    split: Split,
    k: usize,
) -> (f64, f64) {
    brute_eval(corpus, split, k, |q, d| {
        cos(signal_block(cfg, q), signal_block(cfg, d))
    })
}
