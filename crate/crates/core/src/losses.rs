//! Scoring and training objectives.
//!
//! The pairwise ranking loss follows the weakly supervised formulation: for a
//! candidate pair `(i, j)` of one query,
//!
//! ```text
//! C  = σ(Ŝi) − σ(Ŝj)                 contrastive logit
//! L  = L̂i − L̂j                        generator-loss difference
//! F  = C              if L < 0        document i helps the generator more
//!    = log(1 − C̄)     if L > 0        C̄ = min(C, 1 − ε)
//! loss = −(1/M) Σ F   over the M pairs with L ≠ 0
//! ```
//!
//! The two branches of `F` are intentionally asymmetric (linear vs log).
//! Generator cross-entropy comes from precomputed choice logits, so it is a
//! constant with respect to the enhancer and contributes no gradient.

use serde::{Deserialize, Serialize};

use crate::enhancer::EnhancerParams;
use crate::error::{Error, Result};
use crate::linalg::{cosine, dot, l2_norm};

/// Generator-loss differences with magnitude at or below this are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn sigmoid_prime(t: f64) -> f64 {
    let s = sigmoid(t);
    s * (1.0 - s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub query_id: String,
    pub doc_i_id: String,
    pub doc_j_id: String,
    pub s_hat_i: f64,
    pub s_hat_j: f64,
    pub gen_loss_i: f64,
    pub gen_loss_j: f64,
}

/// How the summed pair terms are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide by the number of pairs with a nonzero generator-loss difference.
    #[default]
    ContributingPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankLossConfig {
    pub epsilon: f64,
    pub normalization: Normalization,
}

impl Default for RankLossConfig {
    fn default() -> Self {
        RankLossConfig {
            epsilon: 1e-6,
            normalization: Normalization::ContributingPairs,
        }
    }
}

impl RankLossConfig {
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        let cfg = RankLossConfig {
            epsilon,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 0.5), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Which document of a pair the generator prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairIndicator {
    IPreferred,
    JPreferred,
    Excluded,
}

/// Cosine between the enhanced query and document embeddings.
pub fn enhanced_score(params: &EnhancerParams, q_emb: &[f64], d_emb: &[f64]) -> Result<f64> {
    let zq = params.enhance(q_emb)?;
    let zd = params.enhance(d_emb)?;
    cosine(&zq, &zd)
}

/// Maps a cosine score from `[-1, 1]` onto the `[0, 2]` reporting range.
pub fn report_score(s_hat: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s_hat) {
        return Err(Error::OutOfRange(format!("score {s_hat} outside [-1, 1]")));
    }
    Ok(s_hat + 1.0)
}

pub fn contrastive_logit(s_hat_i: f64, s_hat_j: f64) -> f64 {
    sigmoid(s_hat_i) - sigmoid(s_hat_j)
}

pub fn gen_loss_diff(gen_loss_i: f64, gen_loss_j: f64) -> f64 {
    gen_loss_i - gen_loss_j
}

pub fn pair_indicator(l_i: f64) -> PairIndicator {
    if l_i.abs() <= TIE_TOLERANCE {
        PairIndicator::Excluded
    } else if l_i < 0.0 {
        PairIndicator::IPreferred
    } else {
        PairIndicator::JPreferred
    }
}

/// Pair term `F` and its derivative with respect to `C`.
fn pair_f_with_grad(indicator: PairIndicator, c: f64, cfg: &RankLossConfig) -> Result<(f64, f64)> {
    match indicator {
        PairIndicator::IPreferred => Ok((c, 1.0)),
        PairIndicator::JPreferred => {
            let cap = 1.0 - cfg.epsilon;
            if c >= cap {
                Ok(((1.0 - cap).ln(), 0.0))
            } else {
                Ok(((1.0 - c).ln(), -1.0 / (1.0 - c)))
            }
        }
        PairIndicator::Excluded => Err(Error::OutOfRange(
            "excluded pair has no ranking term".into(),
        )),
    }
}

pub fn pair_f(indicator: PairIndicator, c: f64, cfg: &RankLossConfig) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange(format!(
            "contrastive logit {c} outside [-1, 1]"
        )));
    }
    Ok(pair_f_with_grad(indicator, c, cfg)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankLoss {
    pub loss: f64,
    /// `(∂loss/∂Ŝi, ∂loss/∂Ŝj)` for every input pair, in input order.
    pub grads: Vec<(f64, f64)>,
    pub contributing: usize,
}

pub fn rank_loss(pairs: &[PairSample], cfg: &RankLossConfig) -> Result<RankLoss> {
    let mut terms = Vec::with_capacity(pairs.len());
    for p in pairs {
        let ind = pair_indicator(gen_loss_diff(p.gen_loss_i, p.gen_loss_j));
        if ind == PairIndicator::Excluded {
            terms.push(None);
            continue;
        }
        let c = contrastive_logit(p.s_hat_i, p.s_hat_j);
        let (f, df_dc) = pair_f_with_grad(ind, c, cfg)?;
        terms.push(Some((f, df_dc)));
    }
    let contributing = terms.iter().flatten().count();
    if contributing == 0 {
        return Ok(RankLoss {
            loss: 0.0,
            grads: vec![(0.0, 0.0); pairs.len()],
            contributing: 0,
        });
    }
    let m = contributing as f64;
    let sum: f64 = terms.iter().flatten().map(|(f, _)| f).sum();
    let grads = pairs
        .iter()
        .zip(&terms)
        .map(|(p, t)| match t {
            Some((_, df_dc)) => {
                let scale = -df_dc / m;
                (
                    scale * sigmoid_prime(p.s_hat_i),
                    -scale * sigmoid_prime(p.s_hat_j),
                )
            }
            None => (0.0, 0.0),
        })
        .collect();
    Ok(RankLoss {
        loss: -sum / m,
        grads,
        contributing,
    })
}

/// Softmax cross-entropy of the choice logits against the correct choice.
pub fn gen_cross_entropy(choice_logits: &[f64], correct_index: usize) -> Result<f64> {
    if choice_logits.len() < 2 {
        return Err(Error::OutOfRange(format!(
            "need at least 2 choices, got {}",
            choice_logits.len()
        )));
    }
    if correct_index >= choice_logits.len() {
        return Err(Error::OutOfRange(format!(
            "correct index {correct_index} for {} choices",
            choice_logits.len()
        )));
    }
    if choice_logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("choice logits".into()));
    }
    let max = choice_logits
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let lse = max
        + choice_logits
            .iter()
            .map(|s| (s - max).exp())
            .sum::<f64>()
            .ln();
    Ok((lse - choice_logits[correct_index]).max(0.0))
}

pub fn total_loss(rank: f64, gen: f64, lambda_gen: f64) -> f64 {
    rank + lambda_gen * gen
}

/// Gradient of `cosine(zq, zd)` with respect to both arguments.
pub fn cosine_grad(zq: &[f64], zd: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let nq = l2_norm(zq);
    let nd = l2_norm(zd);
    if nq == 0.0 || nd == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    let raw = dot(zq, zd)? / (nq * nd);
    let gq = zq
        .iter()
        .zip(zd)
        .map(|(q, d)| d / (nq * nd) - raw * q / (nq * nq))
        .collect();
    let gd = zq
        .iter()
        .zip(zd)
        .map(|(q, d)| q / (nq * nd) - raw * d / (nd * nd))
        .collect();
    Ok((raw.clamp(-1.0, 1.0), gq, gd))
}
