//! Rollout collection over vectorized environments and the epoch loop.

use std::collections::VecDeque;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::policy::{sample_action, PolicyParams};
use super::ppo::{ppo_update, values, Adam, PpoConfig, PpoError, RolloutBuffer, UpdateStats};
use crate::course::Level;
use crate::export::fmt_g9;
use crate::reward::RewardModel;
use crate::sim::env::{EpisodeSummary, VecEnv};
use crate::sim::{Observation, SimConfig, SimError, ACTION_DIM, OBS_DIM};
use crate::Vec3;

// ChaCha stream ids reserved for the trainer; environments use 0..n_envs.
const INIT_STREAM: u64 = u64::MAX;
const SAMPLE_STREAM: u64 = u64::MAX - 1;
const SHUFFLE_STREAM: u64 = u64::MAX - 2;

#[derive(Debug, Clone)]
pub struct TrainSetup {
    pub level: Level,
    pub sim: SimConfig,
    pub reward: RewardModel,
    pub ppo: PpoConfig,
}

/// One row of the training log. Episode statistics are means over the most
/// recent `n_envs` completed episodes (zero before any episode finishes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_episode_reward: f64,
    pub mean_gate_reward: f64,
    pub mean_hover_reward: f64,
    pub mean_gates_passed: f64,
    pub episodes_completed: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub kl: f64,
    pub clip_fraction: f64,
    pub learning_rate: f64,
}

impl EpochStats {
    pub const CSV_HEADER: &'static str = "epoch,mean_episode_reward,mean_gate_reward,mean_hover_reward,mean_gates_passed,episodes_completed,policy_loss,value_loss,entropy,kl,clip_fraction,learning_rate";

    pub fn csv_row(&self) -> String {
        let reals = [
            self.mean_episode_reward,
            self.mean_gate_reward,
            self.mean_hover_reward,
            self.mean_gates_passed,
        ];
        let losses = [self.policy_loss, self.value_loss, self.entropy, self.kl, self.clip_fraction, self.learning_rate];
        let mut cols = vec![self.epoch.to_string()];
        cols.extend(reals.iter().map(|&x| fmt_g9(x)));
        cols.push(self.episodes_completed.to_string());
        cols.extend(losses.iter().map(|&x| fmt_g9(x)));
        cols.join(",")
    }
}

pub fn stats_csv(history: &[EpochStats]) -> String {
    let mut out = String::from(EpochStats::CSV_HEADER);
    out.push('\n');
    for row in history {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("observation size {found} does not match the policy input {expected}")]
    ObservationSize { expected: usize, found: usize },
    #[error("epoch hook failed: {0}")]
    Hook(String),
}

/// Passed to the epoch hook after every update.
#[derive(Debug)]
pub struct EpochProgress<'a> {
    pub epoch: usize,
    pub params: &'a PolicyParams,
    pub history: &'a [EpochStats],
}

pub fn init_params(cfg: &PpoConfig) -> PolicyParams {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INIT_STREAM);
    PolicyParams::init(OBS_DIM, ACTION_DIM, &cfg.hidden, cfg.actor_out_scale, cfg.init_log_std, &mut rng)
}

fn obs_matrix(obs: &[Observation]) -> Array2<f64> {
    Array2::from_shape_fn((obs.len(), OBS_DIM), |(i, j)| obs[i].0[j])
}

pub struct Trainer {
    setup: TrainSetup,
    params: PolicyParams,
    adam: Adam,
    lr: f64,
    envs: VecEnv,
    obs: Vec<Observation>,
    sampler: ChaCha8Rng,
    shuffler: ChaCha8Rng,
    recent: VecDeque<EpisodeSummary>,
    history: Vec<EpochStats>,
}

impl Trainer {
    pub fn new(setup: TrainSetup) -> Result<Self, TrainError> {
        setup.ppo.validate()?;
        setup.sim.validate()?;
        let cfg = &setup.ppo;
        let params = init_params(cfg);
        let envs = VecEnv::new(cfg.n_envs, setup.level, setup.sim, setup.reward.clone(), cfg.seed);
        let obs = envs.observations();
        let stream = |id| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(id);
            rng
        };
        Ok(Self {
            adam: Adam::new(params.n_params()),
            lr: cfg.lr0,
            sampler: stream(SAMPLE_STREAM),
            shuffler: stream(SHUFFLE_STREAM),
            recent: VecDeque::with_capacity(cfg.n_envs),
            history: Vec::with_capacity(cfg.epochs),
            params,
            envs,
            obs,
            setup,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn history(&self) -> &[EpochStats] {
        &self.history
    }

    /// The most recent completed episodes (at most `n_envs`), oldest first.
    pub fn recent_episodes(&self) -> impl Iterator<Item = &EpisodeSummary> {
        self.recent.iter()
    }

    fn collect(&mut self) -> Result<RolloutBuffer, TrainError> {
        let cfg = &self.setup.ppo;
        let (n, horizon) = (cfg.n_envs, cfg.horizon);
        let mut buf = RolloutBuffer::new(n, horizon, OBS_DIM, ACTION_DIM);
        for t in 0..horizon {
            let obs = obs_matrix(&self.obs);
            let out = self.params.forward(obs.view());
            let mut actions = Vec::with_capacity(n);
            for env in 0..n {
                let row = buf.row(t, env);
                let mean = out.mean.row(env).to_vec();
                let log_std = out.log_std.row(env).to_vec();
                let (a, lp) = sample_action(&mean, &log_std, &mut self.sampler);
                buf.obs.row_mut(row).assign(&obs.row(env));
                buf.actions.row_mut(row).assign(&ndarray::ArrayView1::from(&a));
                buf.old_mean.row_mut(row).assign(&out.mean.row(env));
                buf.old_log_std.row_mut(row).assign(&out.log_std.row(env));
                buf.log_probs[row] = lp;
                buf.values[row] = out.value[env];
                actions.push(Vec3::new(a[0], a[1], a[2]));
            }
            let transitions = self.envs.step(&actions)?;
            for (env, tr) in transitions.into_iter().enumerate() {
                let row = buf.row(t, env);
                buf.rewards[row] = tr.reward.total;
                buf.dones[row] = tr.events.done;
                self.obs[env] = tr.obs;
                if let Some(ep) = tr.episode {
                    if self.recent.len() == n {
                        self.recent.pop_front();
                    }
                    self.recent.push_back(ep);
                }
            }
        }
        let last = values(&self.params, obs_matrix(&self.obs).view());
        buf.finish(last.as_slice().expect("contiguous"), cfg.gamma, cfg.gae_lambda);
        Ok(buf)
    }

    fn epoch_stats(&self, epoch: usize, update: &UpdateStats) -> EpochStats {
        let k = self.recent.len();
        let mean = |f: fn(&EpisodeSummary) -> f64| if k == 0 { 0.0 } else { self.recent.iter().map(f).sum::<f64>() / k as f64 };
        EpochStats {
            epoch,
            mean_episode_reward: mean(|e| e.total_reward),
            mean_gate_reward: mean(|e| e.gate_reward),
            mean_hover_reward: mean(|e| e.hover_reward),
            mean_gates_passed: mean(|e| e.gates_passed as f64),
            episodes_completed: k,
            policy_loss: update.policy_loss,
            value_loss: update.value_loss,
            entropy: update.entropy,
            kl: update.kl,
            clip_fraction: update.clip_fraction,
            learning_rate: update.learning_rate,
        }
    }

    /// Collects one rollout, updates the policy and appends a stats row.
    pub fn run_epoch(&mut self) -> Result<&EpochStats, TrainError> {
        let buf = self.collect()?;
        let update = ppo_update(&mut self.params, &mut self.adam, &mut self.lr, &buf, &self.setup.ppo, &mut self.shuffler)?;
        let stats = self.epoch_stats(self.history.len() + 1, &update);
        self.history.push(stats);
        Ok(self.history.last().unwrap())
    }

    pub fn into_parts(self) -> (PolicyParams, Vec<EpochStats>) {
        (self.params, self.history)
    }
}

/// Runs `ppo.epochs` epochs; `on_epoch` sees the parameters and history after
/// each one (checkpointing lives there).
pub fn train(setup: TrainSetup, mut on_epoch: impl FnMut(&EpochProgress) -> Result<(), String>) -> Result<(PolicyParams, Vec<EpochStats>), TrainError> {
    let epochs = setup.ppo.epochs;
    let mut trainer = Trainer::new(setup)?;
    for epoch in 1..=epochs {
        trainer.run_epoch()?;
        on_epoch(&EpochProgress { epoch, params: &trainer.params, history: &trainer.history }).map_err(TrainError::Hook)?;
    }
    Ok(trainer.into_parts())
}

/// Deterministic mean action for one observation.
pub fn greedy_action(params: &PolicyParams, obs: &Observation) -> Result<Vec3, TrainError> {
    if params.obs_dim() != OBS_DIM {
        return Err(TrainError::ObservationSize { expected: params.obs_dim(), found: OBS_DIM });
    }
    let x = ndarray::ArrayView2::from_shape((1, OBS_DIM), &obs.0).expect("row");
    let out = params.actor.forward(x);
    Ok(Vec3::new(out[[0, 0]], out[[0, 1]], out[[0, 2]]))
}

/// Trailing moving average over `window` entries (shorter at the start).
pub fn smooth(xs: &[f64], window: usize) -> Vec<f64> {
    (0..xs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            xs[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}
