//! Clipped PPO: advantage estimation, loss gradients and the update loop.

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::nn::{entropy, masked_softmax, Adam, Mlp};

#[derive(Clone, Debug, PartialEq)]
pub struct PpoConfig {
    pub lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub update_epochs: usize,
    pub minibatches: usize,
    pub ent_coef: f64,
    pub vf_coef: f64,
    pub max_grad_norm: f64,
    /// Decay the learning rate linearly to zero over training.
    pub anneal_lr: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            update_epochs: 4,
            minibatches: 4,
            ent_coef: 0.01,
            vf_coef: 0.5,
            max_grad_norm: 0.5,
            anneal_lr: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("lr", self.lr),
            ("gamma", self.gamma),
            ("gae_lambda", self.gae_lambda),
            ("max_grad_norm", self.max_grad_norm),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{k} must be positive"));
            }
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err("clip must lie in (0, 1)".into());
        }
        if self.update_epochs == 0 || self.minibatches == 0 {
            return Err("update_epochs and minibatches must be at least 1".into());
        }
        if self.ent_coef < 0.0 || self.vf_coef < 0.0 {
            return Err("loss coefficients must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpoError {
    #[error("sequence lengths differ: {0}")]
    LengthMismatch(String),
    #[error("empty training batch")]
    EmptyBatch,
    #[error("non-finite loss in epoch {epoch}, minibatch {minibatch}: policy {policy_loss}, value {value_loss}, entropy {entropy}")]
    NonFinite {
        epoch: usize,
        minibatch: usize,
        policy_loss: f64,
        value_loss: f64,
        entropy: f64,
    },
}

/// Generalized advantage estimates and returns for one trajectory segment.
/// `dones[t]` marks that the episode ended with transition `t`;
/// `bootstrap` is the value of the state after the last transition.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), PpoError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(PpoError::LengthMismatch(format!(
            "rewards {n}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, ret))
}

/// One learner decision prepared for the update.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub obs: Vec<f32>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossStats {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// PPO loss on `batch` (means over samples) and its gradient:
/// clipped surrogate, minus `ent_coef` times entropy, plus `vf_coef` times
/// half the squared value error.
pub fn loss_and_grad<T: Float>(
    net: &Mlp<T>,
    batch: &[&TrainSample],
    cfg: &PpoConfig,
) -> (LossStats, Mlp<T>) {
    let mut grad = net.zeros_like();
    let mut st = LossStats::default();
    let inv_b = 1.0 / batch.len() as f64;
    for s in batch {
        let obs: Vec<T> = s.obs.iter().map(|&v| T::from(v).unwrap()).collect();
        let act = net.activations(&obs);
        let probs: Vec<f64> = masked_softmax(&act.logits, &s.mask)
            .iter()
            .map(|p| p.to_f64().unwrap())
            .collect();
        let logp = probs[s.action].ln();
        let log_ratio = logp - s.old_log_prob;
        let ratio = log_ratio.exp();
        let a = s.advantage;
        let pg1 = -a * ratio;
        let pg2 = -a * ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
        let pg = pg1.max(pg2);
        let dlogp = if pg1 >= pg2 { -a * ratio } else { 0.0 };
        let h = entropy(&probs);
        let value = act.value.to_f64().unwrap();
        let verr = value - s.ret;

        st.policy_loss += pg * inv_b;
        st.entropy += h * inv_b;
        st.value_loss += 0.5 * verr * verr * inv_b;
        st.approx_kl += ((ratio - 1.0) - log_ratio) * inv_b;
        if (ratio - 1.0).abs() > cfg.clip {
            st.clip_fraction += inv_b;
        }

        let dlogits: Vec<T> = probs
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                if !s.mask[j] || p == 0.0 {
                    return T::zero();
                }
                let onehot = if j == s.action { 1.0 } else { 0.0 };
                let d_pg = dlogp * (onehot - p);
                let d_ent = -p * (p.ln() + h);
                T::from((d_pg - cfg.ent_coef * d_ent) * inv_b).unwrap()
            })
            .collect();
        let dvalue = T::from(cfg.vf_coef * verr * inv_b).unwrap();
        net.backward(&obs, &act, &dlogits, dvalue, &mut grad);
    }
    st.loss = st.policy_loss - cfg.ent_coef * st.entropy + cfg.vf_coef * st.value_loss;
    (st, grad)
}

/// Mean statistics over all minibatch passes of an update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub samples: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    pub grad_norm: f64,
}

/// Normalizes advantages across the batch (zero mean, unit deviation).
pub fn normalize_advantages(batch: &mut [TrainSample]) {
    let n = batch.len() as f64;
    let mean = batch.iter().map(|s| s.advantage).sum::<f64>() / n;
    let var = batch.iter().map(|s| (s.advantage - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for s in batch.iter_mut() {
        s.advantage = (s.advantage - mean) / (sd + 1e-8);
    }
}

/// Runs `update_epochs` passes of `minibatches` shuffled minibatches.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut Mlp<f32>,
    opt: &mut Adam,
    batch: &mut [TrainSample],
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats, PpoError> {
    if batch.is_empty() {
        return Err(PpoError::EmptyBatch);
    }
    normalize_advantages(batch);
    let mut idx: Vec<usize> = (0..batch.len()).collect();
    let chunk = batch.len().div_ceil(cfg.minibatches.max(1));
    let mut out = UpdateStats {
        samples: batch.len(),
        ..Default::default()
    };
    let mut passes = 0.0;
    for epoch in 0..cfg.update_epochs {
        idx.shuffle(rng);
        for (minibatch, part) in idx.chunks(chunk).enumerate() {
            let mb: Vec<&TrainSample> = part.iter().map(|&i| &batch[i]).collect();
            let (st, grad) = loss_and_grad(net, &mb, cfg);
            if !st.loss.is_finite() || !grad.is_finite() {
                return Err(PpoError::NonFinite {
                    epoch,
                    minibatch,
                    policy_loss: st.policy_loss,
                    value_loss: st.value_loss,
                    entropy: st.entropy,
                });
            }
            out.grad_norm += opt.step(net, &grad);
            out.policy_loss += st.policy_loss;
            out.value_loss += st.value_loss;
            out.entropy += st.entropy;
            out.clip_fraction += st.clip_fraction;
            out.approx_kl += st.approx_kl;
            passes += 1.0;
        }
    }
    for v in [
        &mut out.policy_loss,
        &mut out.value_loss,
        &mut out.entropy,
        &mut out.clip_fraction,
        &mut out.approx_kl,
        &mut out.grad_norm,
    ] {
        *v /= passes;
    }
    Ok(out)
}
