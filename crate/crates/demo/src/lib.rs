//! Browser bindings: train an enhancer on a synthetic corpus, compare
//! rankings, and plot the pair loss. Every method returns a JSON string.

use jetr_core::dataset::fuse_query_embedding;
use jetr_core::losses::{pair_f, pair_indicator, RankLossConfig};
use jetr_core::pipeline::{init_checkpoint, resume};
use jetr_core::policy::describe_counts;
use jetr_core::{
    evaluate, synth_generate, Checkpoint, Corpus, Modality, PolicyConfig, QuestionType, Scorer,
    Split, SyntheticConfig, TrainConfig,
};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
struct RankRow {
    doc_id: String,
    relevant: bool,
    raw_cosine: f64,
    raw_rank: usize,
    enhanced_score: f64,
}

/// Pure-Rust core of the demo, kept free of `JsValue` so it runs in native tests.
pub struct Session {
    corpus: Corpus,
    ckpt: Checkpoint,
    losses: Vec<f64>,
}

impl Session {
    pub fn new(seed: u64, noise: f64, gain: f64) -> jetr_core::Result<Self> {
        let synth = SyntheticConfig {
            seed,
            noise_scale: noise,
            logit_gain: gain,
            ..Default::default()
        };
        let corpus = synth_generate(&synth)?;
        let cfg = TrainConfig {
            deterministic: true,
            ..Default::default()
        };
        let ckpt = init_checkpoint(&corpus, &cfg)?;
        Ok(Session {
            corpus,
            ckpt,
            losses: Vec::new(),
        })
    }

    pub fn epoch(&self) -> usize {
        let per_epoch = self
            .corpus
            .splits()
            .train
            .len()
            .div_ceil(self.ckpt.config.batch_size);
        self.ckpt.step as usize / per_epoch.max(1)
    }

    /// Runs `epochs` more epochs and returns the rank loss of each new step.
    pub fn train(&mut self, epochs: usize) -> jetr_core::Result<Vec<f64>> {
        let target = self.epoch() + epochs;
        let (ckpt, history) = resume(&self.corpus, self.ckpt.clone(), target, |_, _| Ok(()))?;
        self.ckpt = ckpt;
        let new: Vec<f64> = history.steps.iter().map(|s| s.rank_loss).collect();
        self.losses.extend(&new);
        Ok(new)
    }

    pub fn metrics(&self, k: usize) -> jetr_core::Result<serde_json::Value> {
        let ev = evaluate(&self.corpus, Split::Validation, Some(&self.ckpt.params), k)?;
        Ok(json!({
            "epoch": self.epoch(),
            "losses": self.losses,
            "raw": ev.raw.report,
            "enhanced": ev.enhanced.map(|e| e.report),
        }))
    }

    pub fn query_ids(&self) -> Vec<String> {
        self.corpus
            .split_queries(Split::Validation)
            .iter()
            .map(|q| q.query_id.clone())
            .collect()
    }

    pub fn rank(&self, query_id: &str, k: usize) -> jetr_core::Result<serde_json::Value> {
        let q = self
            .corpus
            .query(query_id)
            .ok_or_else(|| jetr_core::Error::Unknown {
                kind: "query",
                name: query_id.to_string(),
            })?;
        let fused = fuse_query_embedding(&q.text_embedding, q.image_embedding.as_deref())?;
        let store = self.corpus.store();
        let n = store.len();
        let raw = store.topk(&fused, n, Some(Modality::Text), Scorer::Raw)?;
        let enhanced = store.topk(
            &fused,
            k,
            Some(Modality::Text),
            Scorer::Enhanced(&self.ckpt.params),
        )?;
        let rows: Vec<RankRow> = enhanced
            .entries
            .iter()
            .map(|e| RankRow {
                doc_id: e.doc_id.clone(),
                relevant: store
                    .get(&e.doc_id)
                    .is_some_and(|d| d.lesson_id == q.lesson_id),
                raw_cosine: e.raw_cosine,
                raw_rank: raw
                    .entries
                    .iter()
                    .position(|r| r.doc_id == e.doc_id)
                    .unwrap_or(n)
                    + 1,
                enhanced_score: e.enhanced_score.unwrap_or(f64::NAN),
            })
            .collect();
        Ok(json!({
            "query_id": q.query_id,
            "lesson_id": q.lesson_id,
            "qtype": q.qtype,
            "context": describe_counts(q.qtype, &PolicyConfig::default()),
            "rows": rows,
        }))
    }
}

#[wasm_bindgen]
pub struct Demo {
    inner: Session,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, noise: f64, gain: f64) -> Result<Demo, JsValue> {
        Ok(Demo {
            inner: Session::new(seed as u64, noise, gain).map_err(js_err)?,
        })
    }

    pub fn train(&mut self, epochs: u32) -> Result<String, JsValue> {
        let losses = self.inner.train(epochs as usize).map_err(js_err)?;
        serde_json::to_string(&losses).map_err(js_err)
    }

    pub fn metrics(&self, k: u32) -> Result<String, JsValue> {
        let m = self.inner.metrics(k as usize).map_err(js_err)?;
        Ok(m.to_string())
    }

    pub fn query_ids(&self) -> String {
        serde_json::to_string(&self.inner.query_ids()).unwrap_or_default()
    }

    pub fn rank(&self, query_id: &str, k: u32) -> Result<String, JsValue> {
        let r = self.inner.rank(query_id, k as usize).map_err(js_err)?;
        Ok(r.to_string())
    }
}

/// Points `(C, F)` of the pair term for one side of the indicator. A negative
/// `l_i` means the generator prefers document i.
pub fn pair_curve(l_i: f64, epsilon: f64, points: usize) -> jetr_core::Result<Vec<(f64, f64)>> {
    let cfg = RankLossConfig::with_epsilon(epsilon)?;
    let ind = pair_indicator(l_i);
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let c = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            Ok((c, pair_f(ind, c, &cfg)?))
        })
        .collect()
}

#[wasm_bindgen]
pub fn pair_loss_curve(l_i: f64, epsilon: f64, points: u32) -> Result<String, JsValue> {
    let pts = pair_curve(l_i, epsilon, points as usize).map_err(js_err)?;
    serde_json::to_string(&pts).map_err(js_err)
}

#[wasm_bindgen]
pub fn policy(qtype: &str) -> Result<String, JsValue> {
    let q: QuestionType = qtype.parse().map_err(js_err)?;
    Ok(describe_counts(q, &PolicyConfig::default()))
}
