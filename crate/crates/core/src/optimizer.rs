//! AdamW with decoupled weight decay (biases are not decayed).

use serde::{Deserialize, Serialize};

use crate::enhancer::EnhancerParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Rescale the full gradient to at most this L2 norm. Off by default.
    pub clip_grad_norm: Option<f64>,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
            clip_grad_norm: None,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.weight_decay >= 0.0
            && self.clip_grad_norm.is_none_or(|c| c > 0.0);
        if !ok {
            return Err(Error::Config(format!("invalid optimizer config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptState {
    pub m: EnhancerParams,
    pub v: EnhancerParams,
    pub t: u64,
}

impl OptState {
    pub fn new(params: &EnhancerParams) -> Self {
        OptState {
            m: EnhancerParams::zeros(params.dims()),
            v: EnhancerParams::zeros(params.dims()),
            t: 0,
        }
    }
}

fn grad_norm(grads: &EnhancerParams) -> f64 {
    grads
        .tensors()
        .iter()
        .flat_map(|(t, _)| t.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// One AdamW update, in place. On error nothing is modified.
pub fn adamw_step(
    params: &mut EnhancerParams,
    grads: &EnhancerParams,
    state: &mut OptState,
    cfg: &OptConfig,
) -> Result<()> {
    cfg.validate()?;
    if !params.same_shape(grads) || !params.same_shape(&state.m) || !params.same_shape(&state.v) {
        return Err(Error::Shape(
            "optimizer inputs do not mirror parameters".into(),
        ));
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient; step rejected".into()));
    }
    let scale = match cfg.clip_grad_norm {
        Some(max) => {
            let n = grad_norm(grads);
            if n > max {
                max / n
            } else {
                1.0
            }
        }
        None => 1.0,
    };

    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let decay = 1.0 - cfg.learning_rate * cfg.weight_decay;

    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut());
    for ((((p, is_bias), (g, _)), (m, _)), (v, _)) in tensors {
        for i in 0..p.len() {
            let gi = g[i] * scale;
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            if !is_bias {
                p[i] *= decay;
            }
            p[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}
