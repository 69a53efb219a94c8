//! One-step meta-gradient weights for pseudo-labeled samples.
//!
//! With the lookahead `Θ̂(ε) = Θ − α Σ_i ε_i ∇L_i(Θ)` linear in `ε`,
//! `∂ l_clean(Θ̂) / ∂ε_i = −α ⟨∇L_i(Θ), ∇l_clean(Θ̂)⟩` exactly.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::graph::SignedEdge;
use crate::model::{sign_loss, LossValue, ModelParams, SignBatch};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// Starting point of the per-sample perturbation `ε`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EpsInit {
    /// `ε_i ~ U(0, 1)`. With a small `α` the meta-gradient is tiny next to
    /// `ε`, so the weights stay close to the random draw.
    Uniform,
    /// `ε = 0`: `Θ̂ = Θ` and the weights reduce to the clipped alignment
    /// `max(0, α⟨∇L_i, ∇l_clean⟩)`, normalized.
    #[default]
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReweightConfig {
    pub alpha: f64,
    pub eta: f64,
    pub eps_init: EpsInit,
    pub seed: u64,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        Self { alpha: 1e-3, eta: 1.0, eps_init: EpsInit::Zero, seed: 0 }
    }
}

impl ReweightConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter("eta must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReweightOutput {
    /// Nonnegative; sums to 1, or all zero when every clipped weight vanished.
    pub weights: Vec<f64>,
    pub eps: Vec<f64>,
    pub grad_eps: Vec<f64>,
    /// `l_clean(Θ̂)`.
    pub clean_loss: f64,
}

/// `Θ̂ = Θ − α Σ_i ε_i ∇L_i(Θ)` over the pseudo-labeled batch.
pub fn lookahead_params(params: &ModelParams, sb: &[SignedEdge], eps: &[f64], alpha: f64) -> Result<ModelParams> {
    if sb.len() != eps.len() {
        return Err(Error::ShapeMismatch { expected: sb.len(), found: eps.len() });
    }
    let batch = SignBatch::new(params, sb.iter().copied());
    let mut hat = params.clone();
    batch.add_gradient(eps, -alpha, hat.values_mut());
    Ok(hat)
}

/// Mean sign loss over the clean batch.
pub fn clean_loss(params: &ModelParams, clean: &[SignedEdge]) -> Result<LossValue> {
    if clean.is_empty() {
        return Err(Error::EmptyBatch("clean"));
    }
    let w = vec![1.0 / clean.len() as f64; clean.len()];
    sign_loss(params, clean, &w)
}

/// Weights for `sb` from `ε` drawn per `cfg.eps_init` with `cfg.seed`.
pub fn reweight(params: &ModelParams, clean: &[SignedEdge], sb: &[SignedEdge], cfg: &ReweightConfig) -> Result<ReweightOutput> {
    let mut rng = stream_rng(cfg.seed, Stream::Reweight);
    let eps = draw_eps(sb.len(), cfg.eps_init, &mut rng);
    reweight_with_eps(params, clean, sb, eps, cfg)
}

pub fn draw_eps<R: Rng>(len: usize, init: EpsInit, rng: &mut R) -> Vec<f64> {
    match init {
        EpsInit::Uniform => (0..len).map(|_| rng.random::<f64>()).collect(),
        EpsInit::Zero => vec![0.0; len],
    }
}

/// The update with an explicit `ε`.
pub fn reweight_with_eps(
    params: &ModelParams,
    clean: &[SignedEdge],
    sb: &[SignedEdge],
    eps: Vec<f64>,
    cfg: &ReweightConfig,
) -> Result<ReweightOutput> {
    cfg.validate()?;
    if sb.is_empty() {
        return Err(Error::EmptyBatch("pseudo-labeled"));
    }
    if clean.is_empty() {
        return Err(Error::EmptyBatch("clean"));
    }
    if eps.len() != sb.len() {
        return Err(Error::ShapeMismatch { expected: sb.len(), found: eps.len() });
    }
    let batch = SignBatch::new(params, sb.iter().copied());
    let mut hat = params.clone();
    batch.add_gradient(&eps, -cfg.alpha, hat.values_mut());
    let clean_val = clean_loss(&hat, clean)?;
    if !clean_val.value.is_finite() || !clean_val.grad.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFinite("clean gradient"));
    }

    let grad_eps: Vec<f64> = (0..sb.len()).map(|i| -cfg.alpha * batch.per_sample_dot(i, &clean_val.grad)).collect();
    if !grad_eps.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFinite("meta-gradient"));
    }
    let mut weights: Vec<f64> = eps.iter().zip(&grad_eps).map(|(e, g)| (e - cfg.eta * g).max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        weights.iter_mut().for_each(|w| *w = 0.0);
    }
    Ok(ReweightOutput { weights, eps, grad_eps, clean_loss: clean_val.value })
}

/// `Σ_i w_i L_i` over the pseudo-labeled batch.
pub fn weighted_sb_loss(params: &ModelParams, sb: &[SignedEdge], weights: &[f64]) -> Result<LossValue> {
    sign_loss(params, sb, weights)
}
