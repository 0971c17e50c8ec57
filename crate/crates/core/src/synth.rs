//! Seeded synthetic corpora with planted relevance.
//!
//! Every embedding is `[surface | signal]`. Each surface block is an
//! independent random direction scaled to `surface_scale`, so it dominates
//! the raw cosine while saying nothing about lessons. The signal block carries a unit direction owned by the lesson
//! (orthonormal across lessons while `lessons <= signal_dim`) plus gaussian
//! noise. Generator logits put `logit_gain * <signal_q, signal_d>` on the
//! correct choice, so the generator prefers same-lesson documents while raw
//! cosine mostly tracks uninformative surface coincidences.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Corpus, LogitRecord, QueryRecord, SplitManifest};
use crate::error::{Error, Result};
use crate::linalg::{dot, l2_norm, SplitMix64};
use crate::policy::QuestionType;
use crate::store::{DocRecord, Modality};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub lessons: usize,
    pub docs_per_lesson: usize,
    pub queries_per_lesson: usize,
    pub dim: usize,
    pub signal_dim: usize,
    pub noise_scale: f64,
    pub logit_gain: f64,
    pub seed: u64,
    /// Norm of the surface block relative to the unit signal direction.
    pub surface_scale: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            lessons: 8,
            docs_per_lesson: 12,
            queries_per_lesson: 4,
            dim: 32,
            signal_dim: 8,
            noise_scale: 0.1,
            logit_gain: 4.0,
            seed: 7,
            surface_scale: 3.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.lessons > 0
            && self.docs_per_lesson > 0
            && self.queries_per_lesson > 0
            && self.signal_dim > 0;
        if !positive {
            return Err(Error::Config("synthetic counts must be positive".into()));
        }
        if self.signal_dim >= self.dim {
            return Err(Error::Config(format!(
                "signal_dim {} must be below dim {}",
                self.signal_dim, self.dim
            )));
        }
        if !(self.noise_scale >= 0.0 && self.logit_gain.is_finite() && self.surface_scale >= 0.0) {
            return Err(Error::Config(
                "noise, gain and surface scale must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn surface_dim(&self) -> usize {
        self.dim - self.signal_dim
    }
}

pub fn lesson_id(l: usize) -> String {
    format!("L{l:02}")
}

fn gaussian_vec(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}

/// Unit lesson directions; Gram-Schmidt keeps the first `signal_dim` orthonormal.
fn lesson_directions(rng: &mut SplitMix64, lessons: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(lessons);
    while dirs.len() < lessons {
        let mut v = gaussian_vec(rng, dim);
        if dirs.len() < dim {
            for d in &dirs {
                let p = dot(&v, d).expect("same dim");
                for (x, y) in v.iter_mut().zip(d) {
                    *x -= p * y;
                }
            }
        }
        let n = l2_norm(&v);
        if n < 1e-8 {
            continue;
        }
        dirs.push(v.into_iter().map(|x| x / n).collect());
    }
    dirs
}

struct Sampler<'a> {
    cfg: &'a SyntheticConfig,
    rng: SplitMix64,
    lesson_dirs: Vec<Vec<f64>>,
}

impl Sampler<'_> {
    fn embedding(&mut self, lesson: usize) -> Vec<f64> {
        let cfg = self.cfg;
        let mut e = gaussian_vec(&mut self.rng, cfg.surface_dim());
        let n = l2_norm(&e).max(1e-12);
        for x in e.iter_mut() {
            *x *= cfg.surface_scale / n;
        }
        for i in 0..cfg.signal_dim {
            let noise = self.rng.gaussian() * cfg.noise_scale;
            e.push(self.lesson_dirs[lesson][i] + noise);
        }
        if l2_norm(&e) == 0.0 {
            e[cfg.dim - 1] = 1.0;
        }
        e
    }
}

/// The planted signal block of an embedding.
pub fn signal_block<'a>(cfg: &SyntheticConfig, embedding: &'a [f64]) -> &'a [f64] {
    &embedding[cfg.surface_dim()..]
}

fn qtype_for(index: usize) -> QuestionType {
    match index % 4 {
        0 => QuestionType::NdqTf,
        1 => QuestionType::NdqMc,
        2 => QuestionType::DqMc,
        _ => QuestionType::NdqMc,
    }
}

/// Builds the corpus in memory. Deterministic in `cfg.seed`.
pub fn synth_generate(cfg: &SyntheticConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let lesson_dirs = lesson_directions(&mut rng, cfg.lessons, cfg.signal_dim);
    let mut s = Sampler {
        cfg,
        rng,
        lesson_dirs,
    };

    let images_per_lesson = cfg.docs_per_lesson / 4;
    let mut docs = Vec::new();
    for l in 0..cfg.lessons {
        for d in 0..cfg.docs_per_lesson {
            let modality = if d >= cfg.docs_per_lesson - images_per_lesson {
                Modality::Image
            } else {
                Modality::Text
            };
            docs.push(DocRecord {
                doc_id: format!("{}-D{d:02}", lesson_id(l)),
                modality,
                lesson_id: lesson_id(l),
                embedding: s.embedding(l),
            });
        }
    }

    let mut queries = Vec::new();
    let mut splits = SplitManifest::default();
    let (n_val, n_test) = match cfg.queries_per_lesson {
        1 => (0, 0),
        2 => (1, 0),
        n => ((n / 4).max(1), (n / 4).max(1)),
    };
    for l in 0..cfg.lessons {
        for qi in 0..cfg.queries_per_lesson {
            let qtype = qtype_for(qi);
            let choice_count = if qtype == QuestionType::NdqTf { 2 } else { 4 };
            let correct_index = s.rng.below(choice_count);
            let text_embedding = s.embedding(l);
            let image_embedding = qtype.is_diagram().then(|| s.embedding(l));
            let query_id = format!("{}-Q{qi:02}", lesson_id(l));
            let n_train = cfg.queries_per_lesson - n_val - n_test;
            let bucket = if qi < n_train {
                &mut splits.train
            } else if qi < n_train + n_val {
                &mut splits.validation
            } else {
                &mut splits.test
            };
            bucket.push(query_id.clone());
            queries.push(QueryRecord {
                query_id,
                qtype,
                text_embedding,
                image_embedding,
                choice_count,
                correct_index,
                lesson_id: lesson_id(l),
            });
        }
    }

    let logit_noise = 0.1 * cfg.noise_scale;
    let mut logits = Vec::with_capacity(queries.len() * docs.len());
    for q in &queries {
        let sq = signal_block(cfg, &q.text_embedding);
        for d in &docs {
            let affinity = dot(sq, signal_block(cfg, &d.embedding))?;
            let choice_logits = (0..q.choice_count)
                .map(|c| {
                    let base = if c == q.correct_index {
                        cfg.logit_gain * affinity
                    } else {
                        0.0
                    };
                    base + logit_noise * s.rng.gaussian()
                })
                .collect();
            logits.push(LogitRecord {
                query_id: q.query_id.clone(),
                doc_id: d.doc_id.clone(),
                choice_logits,
            });
        }
    }

    Ok(Corpus::new(docs, queries, logits, splits)?)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    generator: &'static str,
    config: &'a SyntheticConfig,
    docs: usize,
    queries: usize,
    logits: usize,
    train: usize,
    validation: usize,
    test: usize,
}

/// Generates a corpus and writes the four JSONL files plus `manifest.json`.
pub fn write_synthetic(cfg: &SyntheticConfig, dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let corpus = synth_generate(cfg)?;
    corpus.save(dir)?;
    let manifest = Manifest {
        generator: "synthetic-planted-relevance",
        config: cfg,
        docs: corpus.docs().len(),
        queries: corpus.queries().len(),
        logits: corpus.logits().len(),
        train: corpus.splits().train.len(),
        validation: corpus.splits().validation.len(),
        test: corpus.splits().test.len(),
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(corpus)
}
