//! Auto-resetting training environments: each episode runs on a freshly
//! generated course, and every environment draws from its own RNG stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{observe, reset_with, step, DroneState, Observation, SimConfig, SimError, StepEvents};
use crate::course::{generate_course, CourseSpec, Level};
use crate::reward::{PotentialTracker, RewardBreakdown, RewardModel};
use crate::Vec3;

/// Totals of one finished episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    pub gate_reward: f64,
    pub hover_reward: f64,
    pub gates_passed: usize,
    pub n_gates: usize,
    pub steps: u32,
    pub collided: bool,
    pub out_of_bounds: bool,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Observation to act on next; after a terminal step this already
    /// belongs to the new episode.
    pub obs: Observation,
    pub reward: RewardBreakdown,
    pub events: StepEvents,
    pub episode: Option<EpisodeSummary>,
}

#[derive(Debug, Clone)]
pub struct RacingEnv {
    level: Level,
    sim: SimConfig,
    reward: RewardModel,
    rng: ChaCha8Rng,
    course: CourseSpec,
    state: DroneState,
    tracker: PotentialTracker,
    running: EpisodeSummary,
}

impl RacingEnv {
    /// `stream` selects an independent ChaCha stream under `seed`, so
    /// environments built from one master seed never share randomness.
    pub fn new(level: Level, sim: SimConfig, reward: RewardModel, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let course = generate_course(level, rng.gen());
        let state = reset_with(&sim, &mut rng);
        let running = EpisodeSummary { n_gates: course.n_gates(), ..Default::default() };
        Self { level, sim, reward, rng, course, state, tracker: PotentialTracker::default(), running }
    }

    pub fn course(&self) -> &CourseSpec {
        &self.course
    }

    pub fn state(&self) -> &DroneState {
        &self.state
    }

    pub fn observe(&self) -> Observation {
        observe(&self.state, &self.course)
    }

    fn start_episode(&mut self) {
        self.course = generate_course(self.level, self.rng.gen());
        self.state = reset_with(&self.sim, &mut self.rng);
        self.tracker.reset();
        self.running = EpisodeSummary { n_gates: self.course.n_gates(), ..Default::default() };
    }

    pub fn step(&mut self, action: &Vec3) -> Result<Transition, SimError> {
        let (next, events) = step(&self.state, action, &self.course, &self.sim)?;
        let reward = self.reward.total_reward(&events, &next, &self.course, &mut self.tracker);
        self.state = next;
        let ep = &mut self.running;
        ep.total_reward += reward.total;
        ep.gate_reward += reward.gate;
        ep.hover_reward += reward.final_hover;
        ep.gates_passed = next.active_gate;
        ep.steps = next.steps;
        let episode = events.done.then(|| {
            let mut done = *ep;
            done.collided = events.collided;
            done.out_of_bounds = events.out_of_bounds;
            done.timed_out = events.timed_out;
            done
        });
        if events.done {
            self.start_episode();
        }
        Ok(Transition { obs: self.observe(), reward, events, episode })
    }
}

/// A set of environments stepped in index order.
#[derive(Debug, Clone)]
pub struct VecEnv {
    envs: Vec<RacingEnv>,
}

impl VecEnv {
    pub fn new(n_envs: usize, level: Level, sim: SimConfig, reward: RewardModel, seed: u64) -> Self {
        let envs = (0..n_envs as u64).map(|i| RacingEnv::new(level, sim, reward.clone(), seed, i)).collect();
        Self { envs }
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[RacingEnv] {
        &self.envs
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.envs.iter().map(RacingEnv::observe).collect()
    }

    pub fn step(&mut self, actions: &[Vec3]) -> Result<Vec<Transition>, SimError> {
        assert_eq!(actions.len(), self.envs.len(), "one action per environment");
        self.envs.iter_mut().zip(actions).map(|(env, a)| env.step(a)).collect()
    }
}
