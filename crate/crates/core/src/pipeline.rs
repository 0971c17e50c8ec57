//! Training and evaluation orchestration.
//!
//! Per query: fuse the query embedding, take the raw-cosine top
//! `k_candidates` documents, score them with the enhancer, build pairs whose
//! generator losses differ, and backpropagate the ranking loss through both
//! the query and document enhancement paths. The generator term of the total
//! loss is recorded but has no gradient, since the logits are fixed inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{fuse_query_embedding, relevance_labels, Corpus, QueryRecord, Split};
use crate::enhancer::{
    read_params, save_params, ByteReader, EnhancerDims, EnhancerParams, ForwardCache,
};
use crate::error::{Error, Result};
use crate::linalg::SplitMix64;
use crate::losses::{
    cosine_grad, gen_cross_entropy, gen_loss_diff, rank_loss, total_loss, PairSample,
    RankLossConfig, TIE_TOLERANCE,
};
use crate::metrics::{aggregate, MetricsReport, QueryMetrics};
use crate::optimizer::{adamw_step, OptConfig, OptState};
use crate::store::{Modality, RankedList, Scorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub lambda_gen: f64,
    pub k_candidates: usize,
    pub max_pairs_per_query: usize,
    pub epsilon_clamp: f64,
    pub seed: u64,
    pub deterministic: bool,
    pub weight_decay: f64,
    pub hidden1: usize,
    pub hidden2: usize,
    /// Fail on a candidate without generator logits instead of skipping it.
    pub strict_logits: bool,
    pub clip_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 16,
            learning_rate: 0.001,
            epochs: 25,
            lambda_gen: 1.0,
            k_candidates: 10,
            max_pairs_per_query: 45,
            epsilon_clamp: 1e-6,
            seed: 0,
            deterministic: false,
            weight_decay: 0.01,
            hidden1: 256,
            hidden2: 512,
            strict_logits: false,
            clip_grad_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.k_candidates < 2 {
            return Err(Error::Config("k_candidates must be at least 2".into()));
        }
        let max = self.k_candidates * (self.k_candidates - 1) / 2;
        if self.max_pairs_per_query > max {
            return Err(Error::Config(format!(
                "max_pairs_per_query {} exceeds {max} pairs of {} candidates",
                self.max_pairs_per_query, self.k_candidates
            )));
        }
        if !(self.lambda_gen >= 0.0 && self.lambda_gen.is_finite()) {
            return Err(Error::Config(
                "lambda_gen must be finite and nonnegative".into(),
            ));
        }
        self.rank_config()?;
        self.opt_config().validate()
    }

    pub fn rank_config(&self) -> Result<RankLossConfig> {
        RankLossConfig::with_epsilon(self.epsilon_clamp)
    }

    pub fn opt_config(&self) -> OptConfig {
        OptConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            clip_grad_norm: self.clip_grad_norm,
            ..OptConfig::default()
        }
    }

    pub fn enhancer_dims(&self, d_in: usize) -> Result<EnhancerDims> {
        EnhancerDims::new(d_in, self.hidden1, self.hidden2, d_in)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub rank_loss: f64,
    pub gen_loss_mean: f64,
    pub total_loss: f64,
    pub contributing_pairs: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub steps: Vec<StepRecord>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str = "step,rank_loss,gen_loss,total_loss,pairs";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.step, s.rank_loss, s.gen_loss_mean, s.total_loss, s.contributing_pairs
            );
        }
        out
    }

    /// Mean rank loss of the steps in `range` (by position).
    pub fn mean_rank_loss(&self, range: std::ops::Range<usize>) -> Option<f64> {
        let s = self.steps.get(range)?;
        (!s.is_empty()).then(|| s.iter().map(|r| r.rank_loss).sum::<f64>() / s.len() as f64)
    }
}

/// Forward state for one query of a batch.
struct QueryPass {
    query_cache: ForwardCache,
    doc_caches: Vec<ForwardCache>,
    doc_ids: Vec<String>,
    scores: Vec<f64>,
    gen_losses: Vec<f64>,
    /// `(a, b)` candidate indices of each contributing pair.
    pairs: Vec<(usize, usize)>,
}

fn query_pass(
    query: &QueryRecord,
    corpus: &Corpus,
    params: &EnhancerParams,
    cfg: &TrainConfig,
) -> Result<QueryPass> {
    let fused = fuse_query_embedding(&query.text_embedding, query.image_embedding.as_deref())?;
    let candidates = corpus
        .store()
        .topk(&fused, cfg.k_candidates, None, Scorer::Raw)?;
    let query_cache = params.forward(&fused)?;
    let mut pass = QueryPass {
        query_cache,
        doc_caches: Vec::new(),
        doc_ids: Vec::new(),
        scores: Vec::new(),
        gen_losses: Vec::new(),
        pairs: Vec::new(),
    };
    for entry in &candidates.entries {
        let Some(logits) = corpus.logit(&query.query_id, &entry.doc_id) else {
            if cfg.strict_logits {
                return Err(Error::MissingLogits {
                    query_id: query.query_id.clone(),
                    doc_id: entry.doc_id.clone(),
                });
            }
            log::warn!(
                "skipping candidate '{}' of query '{}': no generator logits",
                entry.doc_id,
                query.query_id
            );
            continue;
        };
        let doc = corpus
            .store()
            .get(&entry.doc_id)
            .expect("ranked from store");
        let cache = params.forward(&doc.embedding)?;
        let score = crate::linalg::cosine(&pass.query_cache.z, &cache.z)?;
        pass.gen_losses.push(gen_cross_entropy(
            &logits.choice_logits,
            query.correct_index,
        )?);
        pass.scores.push(score);
        pass.doc_caches.push(cache);
        pass.doc_ids.push(entry.doc_id.clone());
    }
    let n = pass.scores.len();
    let all = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    pass.pairs = all
        .take(cfg.max_pairs_per_query)
        .filter(|&(a, b)| {
            gen_loss_diff(pass.gen_losses[a], pass.gen_losses[b]).abs() > TIE_TOLERANCE
        })
        .collect();
    Ok(pass)
}

impl QueryPass {
    fn pair_samples(&self, query_id: &str) -> Vec<PairSample> {
        self.pairs
            .iter()
            .map(|&(a, b)| PairSample {
                query_id: query_id.to_string(),
                doc_i_id: self.doc_ids[a].clone(),
                doc_j_id: self.doc_ids[b].clone(),
                s_hat_i: self.scores[a],
                s_hat_j: self.scores[b],
                gen_loss_i: self.gen_losses[a],
                gen_loss_j: self.gen_losses[b],
            })
            .collect()
    }

    /// Enhancer gradient given `∂loss/∂Ŝ` for each candidate.
    fn backward(&self, params: &EnhancerParams, score_grads: &[f64]) -> Result<EnhancerParams> {
        let mut grads = EnhancerParams::zeros(params.dims());
        let mut grad_zq = vec![0.0; self.query_cache.z.len()];
        for (cache, &g) in self.doc_caches.iter().zip(score_grads) {
            if g == 0.0 {
                continue;
            }
            let (_, gq, gd) = cosine_grad(&self.query_cache.z, &cache.z)?;
            for (acc, v) in grad_zq.iter_mut().zip(&gq) {
                *acc += g * v;
            }
            let gd: Vec<f64> = gd.iter().map(|v| g * v).collect();
            params.backward_into(cache, &gd, &mut grads)?;
        }
        params.backward_into(&self.query_cache, &grad_zq, &mut grads)?;
        Ok(grads)
    }
}

/// Candidate pairs of one query with their enhanced scores and generator losses.
pub fn sample_pairs(
    query: &QueryRecord,
    corpus: &Corpus,
    params: &EnhancerParams,
    cfg: &TrainConfig,
) -> Result<Vec<PairSample>> {
    Ok(query_pass(query, corpus, params, cfg)?.pair_samples(&query.query_id))
}

/// Loss terms of one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchObjective {
    pub rank_loss: f64,
    pub gen_loss_mean: f64,
    pub total_loss: f64,
    pub contributing_pairs: usize,
}

fn map_queries<T: Send>(
    batch: &[&QueryRecord],
    deterministic: bool,
    f: impl Fn(&QueryRecord) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    if !deterministic {
        use rayon::prelude::*;
        return batch.par_iter().map(|q| f(q)).collect();
    }
    let _ = deterministic;
    batch.iter().map(|q| f(q)).collect()
}

/// Total loss of a batch and its gradient with respect to the enhancer.
/// Per-query gradients are reduced in batch order in every mode.
pub fn batch_objective(
    batch: &[&QueryRecord],
    corpus: &Corpus,
    params: &EnhancerParams,
    cfg: &TrainConfig,
) -> Result<(BatchObjective, EnhancerParams)> {
    let rank_cfg = cfg.rank_config()?;
    let passes = map_queries(batch, cfg.deterministic, |q| {
        query_pass(q, corpus, params, cfg)
    })?;

    let mut all_pairs = Vec::new();
    for (q, pass) in batch.iter().zip(&passes) {
        all_pairs.extend(pass.pair_samples(&q.query_id));
    }
    let ranked = rank_loss(&all_pairs, &rank_cfg)?;

    let mut score_grads: Vec<Vec<f64>> = passes.iter().map(|p| vec![0.0; p.scores.len()]).collect();
    let mut offset = 0;
    for (pass, sg) in passes.iter().zip(score_grads.iter_mut()) {
        for (&(a, b), &(gi, gj)) in pass.pairs.iter().zip(&ranked.grads[offset..]) {
            sg[a] += gi;
            sg[b] += gj;
        }
        offset += pass.pairs.len();
    }

    let gen_count: usize = passes.iter().map(|p| p.gen_losses.len()).sum();
    let gen_loss_mean = if gen_count == 0 {
        0.0
    } else {
        passes.iter().flat_map(|p| &p.gen_losses).sum::<f64>() / gen_count as f64
    };

    let jobs: Vec<(&QueryPass, &Vec<f64>)> = passes.iter().zip(&score_grads).collect();
    let per_query: Vec<EnhancerParams> = {
        #[cfg(feature = "parallel")]
        {
            if cfg.deterministic {
                jobs.iter()
                    .map(|(p, g)| p.backward(params, g))
                    .collect::<Result<_>>()?
            } else {
                use rayon::prelude::*;
                jobs.par_iter()
                    .map(|(p, g)| p.backward(params, g))
                    .collect::<Result<_>>()?
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            jobs.iter()
                .map(|(p, g)| p.backward(params, g))
                .collect::<Result<_>>()?
        }
    };
    let mut grads = EnhancerParams::zeros(params.dims());
    for g in &per_query {
        grads.accumulate(g)?;
    }

    let objective = BatchObjective {
        rank_loss: ranked.loss,
        gen_loss_mean,
        total_loss: total_loss(ranked.loss, gen_loss_mean, cfg.lambda_gen),
        contributing_pairs: ranked.contributing,
    };
    Ok((objective, grads))
}

/// One optimizer step on a batch. Only `params` and `opt_state` change.
pub fn train_step(
    batch: &[&QueryRecord],
    corpus: &Corpus,
    params: &mut EnhancerParams,
    opt_state: &mut OptState,
    cfg: &TrainConfig,
) -> Result<StepRecord> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    let (obj, grads) = batch_objective(batch, corpus, params, cfg)?;
    if !obj.total_loss.is_finite() || !obj.rank_loss.is_finite() {
        return Err(Error::NonFinite(format!(
            "loss at step {}: rank={} gen={} pairs={}",
            opt_state.t + 1,
            obj.rank_loss,
            obj.gen_loss_mean,
            obj.contributing_pairs
        )));
    }
    adamw_step(params, &grads, opt_state, &cfg.opt_config())?;
    Ok(StepRecord {
        step: opt_state.t,
        rank_loss: obj.rank_loss,
        gen_loss_mean: obj.gen_loss_mean,
        total_loss: obj.total_loss,
        contributing_pairs: obj.contributing_pairs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: EnhancerParams,
    pub opt_state: OptState,
    pub config: TrainConfig,
    pub step: u64,
    pub corpus_fingerprint: [u8; 32],
}

const CKPT_MAGIC: &[u8; 8] = b"JETRCKPT";
const CKPT_VERSION: u32 = 1;

fn push_blob(out: &mut Vec<u8>, blob: &[u8]) {
    out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
    out.extend_from_slice(blob);
}

fn read_blob<'a>(r: &mut ByteReader<'a>) -> Result<&'a [u8]> {
    let n = usize::try_from(r.u64()?)
        .map_err(|_| Error::CorruptCheckpoint("blob length overflow".into()))?;
    r.take(n)
}

fn params_from_blob(blob: &[u8]) -> Result<EnhancerParams> {
    let mut r = ByteReader::new(blob);
    let p = read_params(&mut r)?;
    if r.remaining() != 0 {
        return Err(Error::CorruptCheckpoint(
            "trailing bytes in tensor blob".into(),
        ));
    }
    Ok(p)
}

impl Checkpoint {
    /// Layout: magic, version, step, fingerprint, then length-prefixed blobs
    /// for the JSON config, parameters, first and second moments, followed
    /// by the optimizer step counter.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(CKPT_MAGIC);
        out.extend_from_slice(&CKPT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&self.corpus_fingerprint);
        push_blob(&mut out, serde_json::to_string(&self.config)?.as_bytes());
        push_blob(&mut out, &save_params(&self.params));
        push_blob(&mut out, &save_params(&self.opt_state.m));
        push_blob(&mut out, &save_params(&self.opt_state.v));
        out.extend_from_slice(&self.opt_state.t.to_le_bytes());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(8)? != CKPT_MAGIC {
            return Err(Error::CorruptCheckpoint("bad checkpoint magic".into()));
        }
        let version = r.u32()?;
        if version != CKPT_VERSION {
            return Err(Error::CorruptCheckpoint(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let step = r.u64()?;
        let corpus_fingerprint: [u8; 32] = r.take(32)?.try_into().unwrap();
        let config: TrainConfig = serde_json::from_slice(read_blob(&mut r)?)
            .map_err(|e| Error::CorruptCheckpoint(format!("config: {e}")))?;
        let params = params_from_blob(read_blob(&mut r)?)?;
        let m = params_from_blob(read_blob(&mut r)?)?;
        let v = params_from_blob(read_blob(&mut r)?)?;
        let t = r.u64()?;
        if r.remaining() != 0 {
            return Err(Error::CorruptCheckpoint("trailing bytes".into()));
        }
        if !params.same_shape(&m) || !params.same_shape(&v) {
            return Err(Error::CorruptCheckpoint("optimizer state shape".into()));
        }
        Ok(Checkpoint {
            params,
            opt_state: OptState { m, v, t },
            config,
            step,
            corpus_fingerprint,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn fingerprint_hex(&self) -> String {
        self.corpus_fingerprint
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Enhancer parameters from either a training checkpoint or a bare enhancer
/// file, told apart by magic.
pub fn load_enhancer_file(path: impl AsRef<Path>) -> Result<EnhancerParams> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(CKPT_MAGIC) {
        Ok(Checkpoint::from_bytes(&bytes)?.params)
    } else {
        crate::enhancer::load_params(&bytes)
    }
}

/// Fresh checkpoint: Kaiming-initialized enhancer seeded by `cfg.seed`.
pub fn init_checkpoint(corpus: &Corpus, cfg: &TrainConfig) -> Result<Checkpoint> {
    cfg.validate()?;
    let d_in = corpus.dim().ok_or(Error::Empty("corpus"))?;
    let params = EnhancerParams::init(cfg.seed, cfg.enhancer_dims(d_in)?)?;
    Ok(Checkpoint {
        opt_state: OptState::new(&params),
        params,
        config: cfg.clone(),
        step: 0,
        corpus_fingerprint: corpus.fingerprint()?,
    })
}

fn epoch_order(corpus: &Corpus, seed: u64, epoch: u64) -> Vec<&QueryRecord> {
    let mut order = corpus.split_queries(Split::Train);
    // Each epoch gets its own stream so a resumed run reproduces the order.
    let mut mix = SplitMix64::new(seed ^ epoch.wrapping_mul(0xD1B5_4A32_D192_ED03));
    SplitMix64::new(mix.next_u64()).shuffle(&mut order);
    order
}

/// Trains from a fresh initialization.
pub fn train(corpus: &Corpus, cfg: &TrainConfig) -> Result<(Checkpoint, TrainHistory)> {
    let init = init_checkpoint(corpus, cfg)?;
    resume(corpus, init, cfg.epochs, |_, _| Ok(()))
}

/// Continues training `ckpt` up to `epochs` total epochs, calling `on_epoch`
/// after each completed epoch. Checkpoints must sit on an epoch boundary.
pub fn resume(
    corpus: &Corpus,
    mut ckpt: Checkpoint,
    epochs: usize,
    mut on_epoch: impl FnMut(usize, &Checkpoint) -> Result<()>,
) -> Result<(Checkpoint, TrainHistory)> {
    let cfg = ckpt.config.clone();
    cfg.validate()?;
    if ckpt.corpus_fingerprint != corpus.fingerprint()? {
        return Err(Error::Config(
            "checkpoint was trained on a different corpus".into(),
        ));
    }
    let train_count = corpus.splits().train.len();
    let per_epoch = train_count.div_ceil(cfg.batch_size) as u64;
    if per_epoch == 0 || !ckpt.step.is_multiple_of(per_epoch) {
        return Err(Error::Config(format!(
            "checkpoint step {} is not on an epoch boundary ({per_epoch} steps/epoch)",
            ckpt.step
        )));
    }
    let start = (ckpt.step / per_epoch) as usize;
    let mut history = TrainHistory::default();
    for epoch in start..epochs {
        let order = epoch_order(corpus, cfg.seed, epoch as u64);
        for batch in order.chunks(cfg.batch_size) {
            let rec = train_step(batch, corpus, &mut ckpt.params, &mut ckpt.opt_state, &cfg)?;
            ckpt.step += 1;
            history.steps.push(StepRecord {
                step: ckpt.step,
                ..rec
            });
        }
        on_epoch(epoch + 1, &ckpt)?;
    }
    Ok((ckpt, history))
}

/// Metrics for one scorer: the aggregate plus the per-query rows it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerEvaluation {
    pub report: MetricsReport,
    pub per_query: Vec<QueryMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub raw: ScorerEvaluation,
    pub enhanced: Option<ScorerEvaluation>,
}

/// Evaluates an arbitrary ranker over the text documents of `split`.
/// The ranker receives the query and its fused embedding and must return the
/// full text ranking.
pub fn evaluate_ranker(
    corpus: &Corpus,
    split: Split,
    k: usize,
    ranker: impl Fn(&QueryRecord, &[f64]) -> Result<RankedList>,
) -> Result<ScorerEvaluation> {
    let queries = corpus.split_queries(split);
    if queries.is_empty() {
        return Err(Error::Empty("evaluation split"));
    }
    let text_docs: Vec<_> = corpus
        .docs()
        .iter()
        .filter(|d| d.modality == Modality::Text)
        .collect();
    let mut per_query = Vec::new();
    let mut unevaluable = 0;
    for q in queries {
        let Some(judgment) = relevance_labels(q, text_docs.iter().copied()) else {
            unevaluable += 1;
            continue;
        };
        let fused = fuse_query_embedding(&q.text_embedding, q.image_embedding.as_deref())?;
        let ranked = ranker(q, &fused)?;
        per_query.push(QueryMetrics::compute(
            &ranked,
            &judgment,
            &fused,
            corpus.store(),
            k,
        )?);
    }
    let mut report = aggregate(&per_query, k)?;
    report.unevaluable_count = unevaluable;
    Ok(ScorerEvaluation { report, per_query })
}

/// Raw-cosine metrics, plus enhanced-score metrics when `params` is given.
pub fn evaluate(
    corpus: &Corpus,
    split: Split,
    params: Option<&EnhancerParams>,
    k: usize,
) -> Result<Evaluation> {
    let store = corpus.store();
    let n = store.len().max(1);
    let raw = evaluate_ranker(corpus, split, k, |_, fused| {
        store.topk(fused, n, Some(Modality::Text), Scorer::Raw)
    })?;
    let enhanced = match params {
        None => None,
        Some(p) => {
            let cached = store.enhanced_embeddings(p)?;
            Some(evaluate_ranker(corpus, split, k, |_, fused| {
                store.topk(
                    fused,
                    n,
                    Some(Modality::Text),
                    Scorer::EnhancedCached(p, &cached),
                )
            })?)
        }
    };
    Ok(Evaluation { raw, enhanced })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Significance {
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: usize,
}

impl Significance {
    /// `*` for p < 0.05, `†` for p < 0.1, `-` otherwise.
    pub fn annotation(&self) -> &'static str {
        if self.p_value < 0.05 {
            "*"
        } else if self.p_value < 0.1 {
            "†"
        } else {
            "-"
        }
    }
}

/// Two-sided paired t-test on `a[i] - b[i]`.
pub fn paired_significance(a: &[f64], b: &[f64]) -> Result<Significance> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::Empty("paired samples (need at least 2)"));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // also catches NaN
    if var.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateVariance);
    }
    let t = mean / (var / n).sqrt();
    let df = a.len() - 1;
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .map_err(|e| Error::Config(format!("student t: {e}")))?;
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(Significance {
        mean_difference: mean,
        t_statistic: t,
        p_value: p.clamp(0.0, 1.0),
        degrees_of_freedom: df,
    })
}
