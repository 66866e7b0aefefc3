use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamStore, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Gradients are rescaled so their global L2 norm is at most this.
    pub grad_clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            grad_clip_norm: 10.0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("Adam eps must be positive");
        }
        if !(self.grad_clip_norm > 0.0) {
            return bad("gradient clip norm must be positive");
        }
        Ok(())
    }
}

/// First and second moment estimates, one pair per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub step: u64,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store
            .ids()
            .map(|id| {
                let (r, c) = store.value(id).shape();
                Tensor::zeros(r, c)
            })
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }
}

/// Global L2 norm of the accumulated gradients.
pub fn grad_norm(store: &ParamStore) -> f64 {
    store.ids().map(|id| store.grad(id).sq_norm()).sum::<f64>().sqrt()
}

/// Rescales gradients in place to global norm at most `max_norm`; returns
/// the norm before clipping.
pub fn clip_grad_norm(store: &mut ParamStore, max_norm: f64) -> f64 {
    let norm = grad_norm(store);
    if norm > max_norm {
        let k = max_norm / norm;
        let ids: Vec<_> = store.ids().collect();
        for id in ids {
            store.grad_mut(id).data_mut().iter_mut().for_each(|g| *g *= k);
        }
    }
    norm
}

/// One bias-corrected Adam update from the gradients held in `store`, after
/// global-norm clipping. Returns the pre-clip gradient norm.
pub fn adam_step(store: &mut ParamStore, state: &mut AdamState, cfg: &AdamConfig) -> Result<f64> {
    if let Some(id) = store.ids().find(|&id| !store.grad(id).is_finite()) {
        return Err(Error::NonFiniteGradient(store.name(id).to_string()));
    }
    let norm = clip_grad_norm(store, cfg.grad_clip_norm);
    state.step += 1;
    let bc1 = 1.0 - cfg.beta1.powf(state.step as f64);
    let bc2 = 1.0 - cfg.beta2.powf(state.step as f64);
    let ids: Vec<_> = store.ids().collect();
    for (i, id) in ids.into_iter().enumerate() {
        let grad = store.grad(id).data().to_vec();
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let value = store.value_mut(id).data_mut();
        for k in 0..grad.len() {
            let g = grad[k];
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            value[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(norm)
}
