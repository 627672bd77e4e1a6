//! Clipped-surrogate PPO with GAE, an entropy bonus, Adam and a
//! KL-triggered learning-rate schedule. All gradients are derived by hand.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{split_actor_output, PolicyParams, LN_2PI, LOG_STD_MAX, LOG_STD_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub lr0: f64,
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub n_envs: usize,
    pub horizon: usize,
    pub epochs: usize,
    pub minibatches: usize,
    pub update_epochs: usize,
    pub value_coef: f64,
    pub target_kl: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    /// Global L2 gradient-norm limit; 0 disables clipping.
    pub max_grad_norm: f64,
    pub lr_min: f64,
    pub lr_max: f64,
    pub init_log_std: f64,
    pub actor_out_scale: f64,
    pub checkpoint_every: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            lr0: 4e-4,
            clip_eps: 0.2,
            entropy_coef: 0.01,
            gamma: 0.99,
            gae_lambda: 0.95,
            n_envs: 64,
            horizon: 128,
            epochs: 150,
            minibatches: 4,
            update_epochs: 4,
            value_coef: 0.5,
            target_kl: 0.01,
            seed: 5,
            hidden: vec![128, 128],
            max_grad_norm: 1.0,
            lr_min: 1e-6,
            lr_max: 1e-2,
            init_log_std: 0.0,
            actor_out_scale: 0.01,
            checkpoint_every: 10,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PpoError {
    #[error("invalid PPO config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss in update epoch {update_epoch}, minibatch {minibatch}")]
    NonFiniteLoss { update_epoch: usize, minibatch: usize },
    #[error("non-finite policy parameters after update epoch {update_epoch}, minibatch {minibatch}")]
    NonFiniteParams { update_epoch: usize, minibatch: usize },
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let bad = |m: String| Err(PpoError::InvalidConfig(m));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("gae_lambda must lie in [0, 1], got {}", self.gae_lambda));
        }
        for (name, x) in [("lr0", self.lr0), ("clip_eps", self.clip_eps), ("target_kl", self.target_kl), ("lr_min", self.lr_min), ("lr_max", self.lr_max)] {
            if !(x.is_finite() && x > 0.0) {
                return bad(format!("{name} must be positive, got {x}"));
            }
        }
        for (name, x) in [("entropy_coef", self.entropy_coef), ("value_coef", self.value_coef), ("max_grad_norm", self.max_grad_norm), ("actor_out_scale", self.actor_out_scale)] {
            if !(x.is_finite() && x >= 0.0) {
                return bad(format!("{name} must be non-negative, got {x}"));
            }
        }
        if self.lr_min > self.lr_max {
            return bad(format!("lr_min {} exceeds lr_max {}", self.lr_min, self.lr_max));
        }
        for (name, n) in [("n_envs", self.n_envs), ("horizon", self.horizon), ("minibatches", self.minibatches), ("update_epochs", self.update_epochs)] {
            if n == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.minibatches > self.n_envs * self.horizon {
            return bad(format!("{} minibatches exceed the batch of {}", self.minibatches, self.n_envs * self.horizon));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("hidden layer sizes {:?} must be nonempty and positive", self.hidden));
        }
        if !(LOG_STD_MIN..=LOG_STD_MAX).contains(&self.init_log_std) {
            return bad(format!("init_log_std {} outside [{LOG_STD_MIN}, {LOG_STD_MAX}]", self.init_log_std));
        }
        Ok(())
    }
}

/// Generalized advantage estimation for one environment's time-ordered
/// transitions. `dones[t]` marks transition `t` as the last of its episode,
/// which cuts both the bootstrap and the advantage recursion; the final
/// step otherwise bootstraps from `last_value`. Returns `(advantages,
/// returns)` with `returns = advantages + values`.
pub fn compute_gae(rewards: &[f64], values: &[f64], dones: &[bool], last_value: f64, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "rollout arrays must have equal length");
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * live * next_value - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Shifts and scales to zero mean and unit (population) variance; a
/// constant input becomes all zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a = if std > 1e-12 { (*a - mean) / std } else { 0.0 };
    }
}

/// Flattened rollout of `n_envs × horizon` transitions, stored time-major
/// (`row = t · n_envs + env`).
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub n_envs: usize,
    pub horizon: usize,
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub log_probs: Array1<f64>,
    pub old_mean: Array2<f64>,
    pub old_log_std: Array2<f64>,
    pub rewards: Array1<f64>,
    pub values: Array1<f64>,
    pub dones: Vec<bool>,
    pub advantages: Array1<f64>,
    pub returns: Array1<f64>,
}

impl RolloutBuffer {
    pub fn new(n_envs: usize, horizon: usize, obs_dim: usize, action_dim: usize) -> Self {
        let n = n_envs * horizon;
        Self {
            n_envs,
            horizon,
            obs: Array2::zeros((n, obs_dim)),
            actions: Array2::zeros((n, action_dim)),
            log_probs: Array1::zeros(n),
            old_mean: Array2::zeros((n, action_dim)),
            old_log_std: Array2::zeros((n, action_dim)),
            rewards: Array1::zeros(n),
            values: Array1::zeros(n),
            dones: vec![false; n],
            advantages: Array1::zeros(n),
            returns: Array1::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n_envs * self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, t: usize, env: usize) -> usize {
        t * self.n_envs + env
    }

    /// Runs GAE per environment with the given bootstrap values, then
    /// normalizes advantages over the whole buffer.
    pub fn finish(&mut self, last_values: &[f64], gamma: f64, lambda: f64) {
        assert_eq!(last_values.len(), self.n_envs);
        for env in 0..self.n_envs {
            let rows: Vec<usize> = (0..self.horizon).map(|t| self.row(t, env)).collect();
            let r: Vec<f64> = rows.iter().map(|&i| self.rewards[i]).collect();
            let v: Vec<f64> = rows.iter().map(|&i| self.values[i]).collect();
            let d: Vec<bool> = rows.iter().map(|&i| self.dones[i]).collect();
            let (adv, ret) = compute_gae(&r, &v, &d, last_values[env], gamma, lambda);
            for (k, &i) in rows.iter().enumerate() {
                self.advantages[i] = adv[k];
                self.returns[i] = ret[k];
            }
        }
        normalize_advantages(self.advantages.as_slice_mut().expect("contiguous"));
    }

    pub fn minibatch(&self, rows: &[usize]) -> Minibatch {
        Minibatch {
            obs: self.obs.select(Axis(0), rows),
            actions: self.actions.select(Axis(0), rows),
            old_log_probs: self.log_probs.select(Axis(0), rows),
            old_mean: self.old_mean.select(Axis(0), rows),
            old_log_std: self.old_log_std.select(Axis(0), rows),
            advantages: self.advantages.select(Axis(0), rows),
            returns: self.returns.select(Axis(0), rows),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minibatch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub old_log_probs: Array1<f64>,
    pub old_mean: Array2<f64>,
    pub old_log_std: Array2<f64>,
    pub advantages: Array1<f64>,
    pub returns: Array1<f64>,
}

/// Loss components of one minibatch. `total = policy + value_coef·value −
/// entropy_coef·entropy`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LossTerms {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
    /// Mean analytic KL(old ‖ new) of the action distributions.
    pub kl: f64,
    pub clip_fraction: f64,
}

/// Which loss terms contribute to the returned gradient (all by default).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossMask {
    pub policy: bool,
    pub value: bool,
    pub entropy: bool,
}

impl Default for LossMask {
    fn default() -> Self {
        Self { policy: true, value: true, entropy: true }
    }
}

/// Loss terms and the gradient of the (masked) total loss with respect to
/// the flat parameters (actor first, then critic).
pub fn loss_and_grad(params: &PolicyParams, mb: &Minibatch, cfg: &PpoConfig, mask: LossMask) -> (LossTerms, Vec<f64>) {
    let m = mb.obs.nrows() as f64;
    let a_dim = params.action_dim();
    let (actor_out, actor_cache) = params.actor.forward_cached(mb.obs.view());
    let (critic_out, critic_cache) = params.critic.forward_cached(mb.obs.view());
    let value = critic_out.index_axis(Axis(1), 0).to_owned();
    let out = split_actor_output(actor_out, a_dim, value.clone());

    let mut d_actor = Array2::<f64>::zeros((mb.obs.nrows(), 2 * a_dim));
    let mut terms = LossTerms::default();
    let (lo, hi) = (1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    for i in 0..mb.obs.nrows() {
        let mut logp = 0.0;
        let mut entropy = 0.0;
        let mut kl = 0.0;
        for j in 0..a_dim {
            let (mu, ls) = (out.mean[[i, j]], out.log_std[[i, j]]);
            let z = (mb.actions[[i, j]] - mu) * (-ls).exp();
            logp += -0.5 * z * z - ls - 0.5 * LN_2PI;
            entropy += ls + 0.5 * (1.0 + LN_2PI);
            let (mu0, ls0) = (mb.old_mean[[i, j]], mb.old_log_std[[i, j]]);
            let var_ratio = (2.0 * (ls0 - ls)).exp();
            let dm = (mu0 - mu) * (-ls).exp();
            kl += ls - ls0 + 0.5 * (var_ratio + dm * dm) - 0.5;
        }
        let ratio = (logp - mb.old_log_probs[i]).exp();
        let adv = mb.advantages[i];
        let clipped = ratio.clamp(lo, hi);
        let unclipped_obj = ratio * adv;
        let clipped_obj = clipped * adv;
        terms.policy -= unclipped_obj.min(clipped_obj) / m;
        terms.entropy += entropy / m;
        terms.kl += kl / m;
        if ratio < lo || ratio > hi {
            terms.clip_fraction += 1.0 / m;
        }

        // d(-min(ρA, clip(ρ)A))/d logp is -ρA when the unclipped branch is
        // the active minimum, and 0 otherwise
        let d_logp = if mask.policy && unclipped_obj <= clipped_obj { -ratio * adv / m } else { 0.0 };
        let d_ls_entropy = if mask.entropy { -cfg.entropy_coef / m } else { 0.0 };
        for j in 0..a_dim {
            let (mu, ls) = (out.mean[[i, j]], out.log_std[[i, j]]);
            let inv_var = (-2.0 * ls).exp();
            let diff = mb.actions[[i, j]] - mu;
            d_actor[[i, j]] = d_logp * diff * inv_var;
            let raw = out.raw_log_std[[i, j]];
            let through_clamp = (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw);
            d_actor[[i, a_dim + j]] = if through_clamp { d_logp * (diff * diff * inv_var - 1.0) + d_ls_entropy } else { 0.0 };
        }
    }
    let residual = &value - &mb.returns;
    terms.value = residual.mapv(|r| r * r).sum() / m;
    terms.total = terms.policy + cfg.value_coef * terms.value - cfg.entropy_coef * terms.entropy;

    let scale = if mask.value { 2.0 * cfg.value_coef / m } else { 0.0 };
    let d_critic = (residual * scale).insert_axis(Axis(1));
    let mut grad = params.actor.backward(&actor_cache, &d_actor);
    grad.extend(params.critic.backward(&critic_cache, &d_critic));
    (terms, grad)
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize) -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        assert!(params.len() == self.m.len() && grad.len() == self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Multiplicative KL-triggered schedule: halve when the KL exceeds
/// `1.5·target`, grow by 10% below `target/1.5`, always within bounds.
pub fn adapt_learning_rate(lr: f64, kl: f64, cfg: &PpoConfig) -> f64 {
    let lr = if kl > 1.5 * cfg.target_kl {
        lr / 2.0
    } else if kl < cfg.target_kl / 1.5 {
        lr * 1.1
    } else {
        lr
    };
    lr.clamp(cfg.lr_min, cfg.lr_max)
}

/// Averages over every minibatch step of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub kl: f64,
    pub clip_fraction: f64,
    pub learning_rate: f64,
}

/// One PPO update: `update_epochs` shuffled passes over `minibatches`
/// minibatches at a fixed learning rate. Afterwards the mean KL estimate
/// (each minibatch measured against the rollout policy just before its
/// step) adjusts the rate for the next update.
pub fn ppo_update(params: &mut PolicyParams, adam: &mut Adam, lr: &mut f64, buffer: &RolloutBuffer, cfg: &PpoConfig, rng: &mut impl Rng) -> Result<UpdateStats, PpoError> {
    let n = buffer.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = UpdateStats::default();
    let mut count = 0.0;
    for update_epoch in 0..cfg.update_epochs {
        order.shuffle(rng);
        for minibatch in 0..cfg.minibatches {
            let lo = minibatch * n / cfg.minibatches;
            let hi = (minibatch + 1) * n / cfg.minibatches;
            let mb = buffer.minibatch(&order[lo..hi]);
            let (terms, mut grad) = loss_and_grad(params, &mb, cfg, LossMask::default());
            if !terms.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(PpoError::NonFiniteLoss { update_epoch, minibatch });
            }
            clip_grad_norm(&mut grad, cfg.max_grad_norm);
            let mut flat = params.flat();
            adam.step(&mut flat, &grad, *lr);
            params.set_flat(&flat);
            if !params.is_finite() {
                return Err(PpoError::NonFiniteParams { update_epoch, minibatch });
            }
            stats.policy_loss += terms.policy;
            stats.value_loss += terms.value;
            stats.entropy += terms.entropy;
            stats.kl += terms.kl;
            stats.clip_fraction += terms.clip_fraction;
            count += 1.0;
        }
    }
    stats.policy_loss /= count;
    stats.value_loss /= count;
    stats.entropy /= count;
    stats.kl /= count;
    stats.clip_fraction /= count;
    stats.learning_rate = *lr;
    *lr = adapt_learning_rate(*lr, stats.kl, cfg);
    Ok(stats)
}

/// Rescales `grad` so its L2 norm is at most `max_norm` (0 disables).
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) {
    if max_norm <= 0.0 {
        return;
    }
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
}

/// Evaluates the critic alone (used for bootstrap values).
pub fn values(params: &PolicyParams, obs: ArrayView2<f64>) -> Array1<f64> {
    params.critic.forward(obs).index_axis_move(Axis(1), 0)
}
