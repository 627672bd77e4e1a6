//! Fixed-step point-mass flight through a gate course.

pub mod env;
pub mod geometry;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::course::{CourseSpec, GateSpec, SPAWN};
use crate::Vec3;
use geometry::Segment;

pub const OBS_DIM: usize = 13;
pub const ACTION_DIM: usize = 3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("non-finite action {0:?} at t={1}")]
    NonFiniteAction([f64; 3], f64),
    #[error("invalid sim config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub a_max: f64,
    pub v_cap: f64,
    pub drone_radius: f64,
    pub frame_width: f64,
    pub spawn_jitter: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            t_max: 15.0,
            a_max: 8.0,
            v_cap: 4.0,
            drone_radius: 0.1625,
            frame_width: 0.05,
            spawn_jitter: 0.05,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("a_max", self.a_max),
            ("v_cap", self.v_cap),
            ("drone_radius", self.drone_radius),
            ("frame_width", self.frame_width),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(SimError::InvalidConfig(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.spawn_jitter.is_finite() && self.spawn_jitter >= 0.0) {
            return Err(SimError::InvalidConfig(format!("spawn_jitter must be >= 0, got {}", self.spawn_jitter)));
        }
        let ratio = self.t_max / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return Err(SimError::InvalidConfig(format!("t_max/dt = {ratio} is not integral")));
        }
        Ok(())
    }

    /// Episode length limit in steps.
    pub fn max_steps(&self) -> u32 {
        (self.t_max / self.dt).round() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Racing,
    Hovering,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneState {
    pub p: Vec3,
    pub v: Vec3,
    /// Elapsed time, always `steps · dt` (kept as a count to avoid drift).
    pub t: f64,
    pub steps: u32,
    pub active_gate: usize,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepEvents {
    pub gate_passed: bool,
    pub collided: bool,
    pub out_of_bounds: bool,
    pub timed_out: bool,
    pub done: bool,
}

/// Spawn state with a uniform per-axis jitter drawn from `seed`.
pub fn reset(_course: &CourseSpec, cfg: &SimConfig, seed: u64) -> DroneState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reset_with(cfg, &mut rng)
}

pub fn reset_with(cfg: &SimConfig, rng: &mut impl Rng) -> DroneState {
    let j = cfg.spawn_jitter;
    let mut jitter = || if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 };
    let offset = Vec3::new(jitter(), jitter(), jitter());
    DroneState { p: SPAWN + offset, v: Vec3::zeros(), t: 0.0, steps: 0, active_gate: 0, phase: Phase::Racing }
}

/// Advances one step of semi-implicit Euler and resolves the events of the
/// swept segment in parametric order.
pub fn step(state: &DroneState, action: &Vec3, course: &CourseSpec, cfg: &SimConfig) -> Result<(DroneState, StepEvents), SimError> {
    if !action.iter().all(|a| a.is_finite()) {
        return Err(SimError::NonFiniteAction([action.x, action.y, action.z], state.t));
    }
    let a = action.map(|x| x.clamp(-cfg.a_max, cfg.a_max));
    let mut v = state.v + a * cfg.dt;
    let speed = v.norm();
    if speed > cfg.v_cap {
        v *= cfg.v_cap / speed;
    }
    let p = state.p + v * cfg.dt;
    let seg = Segment::new(state.p, p);

    let t_pass = course
        .gates
        .get(state.active_gate)
        .and_then(|g| geometry::gate_pass_time(&seg, g, cfg.drone_radius));
    let t_contact = course
        .gates
        .iter()
        .filter_map(|g| geometry::collision_time(&seg, g, cfg.drone_radius, cfg.frame_width))
        .min_by(f64::total_cmp);

    let collided = t_contact.is_some();
    let gate_passed = match (t_pass, t_contact) {
        (Some(tp), Some(tc)) => tp < tc,
        (Some(_), None) => true,
        _ => false,
    };
    let out_of_bounds = !course.bounds.contains(&p);
    let steps = state.steps + 1;
    let timed_out = steps >= cfg.max_steps();

    let active_gate = state.active_gate + usize::from(gate_passed);
    let phase = if active_gate >= course.n_gates() { Phase::Hovering } else { Phase::Racing };
    let next = DroneState { p, v, t: steps as f64 * cfg.dt, steps, active_gate, phase };
    let events = StepEvents {
        gate_passed,
        collided,
        out_of_bounds,
        timed_out,
        done: collided || out_of_bounds || timed_out,
    };
    Ok((next, events))
}

/// The target the drone is currently steering to: the active gate's centre,
/// or the goal once every gate is passed.
pub fn active_target(state: &DroneState, course: &CourseSpec) -> Vec3 {
    course.gates.get(state.active_gate).map_or(course.goal, |g| g.center)
}

/// The gate whose orientation frames the current target. While hovering the
/// last gate is used.
pub fn reference_gate<'a>(state: &DroneState, course: &'a CourseSpec) -> &'a GateSpec {
    let idx = state.active_gate.min(course.n_gates() - 1);
    &course.gates[idx]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Layout: target offset in the reference gate's frame (3), world velocity
/// (3), reference gate normal (3), world offset to the following target —
/// the next gate, or the goal (3), hover flag (1).
pub fn observe(state: &DroneState, course: &CourseSpec) -> Observation {
    let gate = reference_gate(state, course);
    let rel = gate.to_gate_frame(&(active_target(state, course) - state.p));
    let n = gate.normal();
    let next = match state.phase {
        Phase::Racing => course.gates.get(state.active_gate + 1).map_or(course.goal, |g| g.center),
        Phase::Hovering => course.goal,
    };
    let next_rel = next - state.p;
    let flag = if state.phase == Phase::Hovering { 1.0 } else { 0.0 };
    let v = state.v;
    Observation([
        rel.x, rel.y, rel.z, v.x, v.y, v.z, n.x, n.y, n.z, next_rel.x, next_rel.y, next_rel.z, flag,
    ])
}
