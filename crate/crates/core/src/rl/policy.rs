//! Diagonal-Gaussian actor and scalar critic.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::mlp::Mlp;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    /// `obs → hidden… → 2·action_dim`: means, then raw log-stds.
    pub actor: Mlp,
    /// `obs → hidden… → 1`.
    pub critic: Mlp,
}

/// Batched policy outputs, one row per observation.
#[derive(Debug, Clone)]
pub struct PolicyOutput {
    pub mean: Array2<f64>,
    /// Clamped into `[LOG_STD_MIN, LOG_STD_MAX]`.
    pub log_std: Array2<f64>,
    /// Pre-clamp values, needed to route gradients through the clamp.
    pub raw_log_std: Array2<f64>,
    pub value: Array1<f64>,
}

impl PolicyParams {
    pub fn zeros(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Self {
        Self { actor: Mlp::zeros(&actor_sizes(obs_dim, action_dim, hidden)), critic: Mlp::zeros(&critic_sizes(obs_dim, hidden)) }
    }

    /// Fan-in uniform initialization with the actor's output layer scaled by
    /// `actor_out_scale`; the log-std biases start at `init_log_std`.
    pub fn init(obs_dim: usize, action_dim: usize, hidden: &[usize], actor_out_scale: f64, init_log_std: f64, rng: &mut impl Rng) -> Self {
        let mut actor = Mlp::init(&actor_sizes(obs_dim, action_dim, hidden), actor_out_scale, rng);
        let critic = Mlp::init(&critic_sizes(obs_dim, hidden), 1.0, rng);
        let n = actor.params().len();
        for b in &mut actor.params_mut()[n - action_dim..] {
            *b = init_log_std;
        }
        Self { actor, critic }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.actor.output_dim() / 2
    }

    pub fn n_params(&self) -> usize {
        self.actor.params().len() + self.critic.params().len()
    }

    /// Actor parameters followed by critic parameters.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.actor.params().to_vec();
        v.extend_from_slice(self.critic.params());
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let n = self.actor.params().len();
        self.actor.params_mut().copy_from_slice(&flat[..n]);
        self.critic.params_mut().copy_from_slice(&flat[n..]);
    }

    pub fn is_finite(&self) -> bool {
        self.actor.params().iter().chain(self.critic.params()).all(|x| x.is_finite())
    }

    pub fn forward(&self, obs: ArrayView2<f64>) -> PolicyOutput {
        let out = self.actor.forward(obs);
        let value = self.critic.forward(obs).index_axis_move(Axis(1), 0);
        split_actor_output(out, self.action_dim(), value)
    }
}

pub fn actor_sizes(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Vec<usize> {
    std::iter::once(obs_dim).chain(hidden.iter().copied()).chain(std::iter::once(2 * action_dim)).collect()
}

pub fn critic_sizes(obs_dim: usize, hidden: &[usize]) -> Vec<usize> {
    std::iter::once(obs_dim).chain(hidden.iter().copied()).chain(std::iter::once(1)).collect()
}

pub(crate) fn split_actor_output(out: Array2<f64>, action_dim: usize, value: Array1<f64>) -> PolicyOutput {
    let mean = out.slice(ndarray::s![.., ..action_dim]).to_owned();
    let raw_log_std = out.slice(ndarray::s![.., action_dim..]).to_owned();
    let log_std = raw_log_std.mapv(|x| x.clamp(LOG_STD_MIN, LOG_STD_MAX));
    PolicyOutput { mean, log_std, raw_log_std, value }
}

/// Draws `mean + exp(log_std) ⊙ ξ` with standard-normal `ξ` and returns it
/// with its log-density.
pub fn sample_action(mean: &[f64], log_std: &[f64], rng: &mut impl Rng) -> (Vec<f64>, f64) {
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(&m, &ls)| {
            let xi: f64 = rng.sample(StandardNormal);
            m + ls.exp() * xi
        })
        .collect();
    let lp = gaussian_log_prob(&action, mean, log_std);
    (action, lp)
}

/// Log-density of a diagonal Gaussian.
pub fn gaussian_log_prob(x: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    x.iter()
        .zip(mean)
        .zip(log_std)
        .map(|((&x, &m), &ls)| {
            let z = (x - m) * (-ls).exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

/// Differential entropy of a diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|&ls| ls + 0.5 * (1.0 + LN_2PI)).sum()
}
