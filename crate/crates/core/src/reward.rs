//! Reward terms, potential-based shaping and the two total-reward
//! compositions (potential-field baseline and fuzzy velocity–distance).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::course::CourseSpec;
use crate::fuzzy::{Engine, FuzzySystem};
use crate::sim::{active_target, reference_gate, DroneState, Phase, StepEvents};
use crate::Vec3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RewardError {
    #[error("reward mode {0} requires a fuzzy system")]
    MissingFuzzySystem(RewardMode),
    #[error("invalid reward config: {0}")]
    InvalidConfig(String),
    #[error("unknown {kind} '{value}'")]
    UnknownVariant { kind: &'static str, value: String },
}

macro_rules! text_enum {
    ($name:ident, $kind:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = RewardError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    other => Err(RewardError::UnknownVariant { kind: $kind, value: other.to_string() }),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Pfbrs,
    FarsMamdani,
    FarsSugeno,
}

text_enum!(RewardMode, "reward mode", { Pfbrs => "pfbrs", FarsMamdani => "fars_mamdani", FarsSugeno => "fars_sugeno" });

impl RewardMode {
    pub fn engine(self) -> Option<Engine> {
        match self {
            RewardMode::Pfbrs => None,
            RewardMode::FarsMamdani => Some(Engine::Mamdani),
            RewardMode::FarsSugeno => Some(Engine::Sugeno),
        }
    }
}

/// Sign of the distance potential. The literal form grows with distance, so
/// shaping it rewards moving away; the default negates it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSign {
    NegativeDistance,
    Literal,
}

text_enum!(DistanceSign, "distance potential sign", { NegativeDistance => "negative_distance", Literal => "literal" });

/// `Literal` is `exp(-|n·v|)`, maximal for motion across the gate normal;
/// `Aligned` is `exp(-(1 - |n·v|))`, maximal for motion along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterAlignment {
    Literal,
    Aligned,
}

text_enum!(CenterAlignment, "center alignment", { Literal => "literal", Aligned => "aligned" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub gamma: f64,
    pub dt: f64,
    pub mode: RewardMode,
    pub d_max: f64,
    pub v_max: f64,
    pub distance_potential_sign: DistanceSign,
    pub center_alignment: CenterAlignment,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            c1: 10.0,
            c2: 1.0,
            c3: 10.0,
            gamma: 0.99,
            dt: 0.02,
            mode: RewardMode::Pfbrs,
            d_max: 3.0,
            v_max: 5.0,
            distance_potential_sign: DistanceSign::NegativeDistance,
            center_alignment: CenterAlignment::Literal,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        for (name, x) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("dt", self.dt), ("d_max", self.d_max), ("v_max", self.v_max)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(RewardError::InvalidConfig(format!("{name} must be positive, got {x}")));
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(RewardError::InvalidConfig(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        Ok(())
    }
}

pub fn gate_reward(passed_this_step: bool, cfg: &RewardConfig) -> f64 {
    if passed_this_step {
        cfg.c1
    } else {
        0.0
    }
}

pub fn final_hover_reward(p: &Vec3, p_goal: &Vec3, in_final_phase: bool, cfg: &RewardConfig) -> f64 {
    if in_final_phase {
        cfg.c2 * (-(p - p_goal).norm()).exp() * cfg.dt
    } else {
        0.0
    }
}

pub fn distance_potential(p: &Vec3, p_target: &Vec3, cfg: &RewardConfig) -> f64 {
    let d = (p - p_target).norm() * cfg.dt;
    match cfg.distance_potential_sign {
        DistanceSign::NegativeDistance => -d,
        DistanceSign::Literal => d,
    }
}

/// Both vectors are unit-normalized first; a zero velocity counts as
/// `n·v = 0`.
pub fn center_alignment_potential(v_agent: &Vec3, n: &Vec3, mode: CenterAlignment) -> f64 {
    let speed = v_agent.norm();
    let cos = if speed > 0.0 { (v_agent / speed).dot(&n.normalize()).abs() } else { 0.0 };
    match mode {
        CenterAlignment::Literal => (-cos).exp(),
        CenterAlignment::Aligned => (-(1.0 - cos)).exp(),
    }
}

pub fn collision_penalty(collided: bool, cfg: &RewardConfig) -> f64 {
    if collided {
        -cfg.c3
    } else {
        0.0
    }
}

/// `γ·current − previous`, or 0 when no previous potential exists; the
/// slot always ends up holding `current`.
pub fn pbrs_delta(current: f64, slot: &mut Option<f64>, gamma: f64) -> f64 {
    let delta = slot.map_or(0.0, |prev| gamma * current - prev);
    *slot = Some(current);
    delta
}

pub fn vd_fuzzy_reward(dist: f64, speed: f64, engine: Engine, system: &FuzzySystem, cfg: &RewardConfig) -> f64 {
    let v_hat = (speed / cfg.v_max).clamp(0.0, 1.0);
    let d_hat = (dist / cfg.d_max).clamp(0.0, 1.0);
    system.infer(engine, v_hat, d_hat) * cfg.dt
}

/// Previous potentials of one environment; empty at episode start.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PotentialTracker {
    pub prev_dist_potential: Option<f64>,
    pub prev_center_potential: Option<f64>,
}

impl PotentialTracker {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub gate: f64,
    pub final_hover: f64,
    pub dist_shaped: f64,
    pub center_shaped: f64,
    pub vd_fuzzy: f64,
    pub collision: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub const CSV_HEADER: &'static str = "gate,final_hover,dist_shaped,center_shaped,vd_fuzzy,collision,total";

    /// The mode's composition, summed in its own term order.
    pub fn compose(&self, mode: RewardMode) -> f64 {
        match mode {
            RewardMode::Pfbrs => self.gate + self.final_hover + self.dist_shaped + self.center_shaped + self.collision,
            RewardMode::FarsMamdani | RewardMode::FarsSugeno => {
                self.gate + self.final_hover + self.vd_fuzzy + self.center_shaped + self.collision
            }
        }
    }

    pub fn fields(&self) -> [f64; 7] {
        [self.gate, self.final_hover, self.dist_shaped, self.center_shaped, self.vd_fuzzy, self.collision, self.total]
    }
}

/// A validated reward configuration bundled with the fuzzy system the fuzzy
/// modes need.
#[derive(Debug, Clone)]
pub struct RewardModel {
    cfg: RewardConfig,
    fuzzy: Option<Arc<FuzzySystem>>,
}

impl RewardModel {
    pub fn new(cfg: RewardConfig, fuzzy: Option<Arc<FuzzySystem>>) -> Result<Self, RewardError> {
        cfg.validate()?;
        if cfg.mode.engine().is_some() && fuzzy.is_none() {
            return Err(RewardError::MissingFuzzySystem(cfg.mode));
        }
        Ok(Self { cfg, fuzzy })
    }

    pub fn config(&self) -> &RewardConfig {
        &self.cfg
    }

    pub fn fuzzy_system(&self) -> Option<&FuzzySystem> {
        self.fuzzy.as_deref()
    }

    /// Reward for the transition that produced `state` (the post-step state)
    /// with `events`. Distances and gate orientation refer to the target that
    /// is active in `state`; while hovering the last gate's normal is used.
    pub fn total_reward(&self, events: &StepEvents, state: &DroneState, course: &CourseSpec, tracker: &mut PotentialTracker) -> RewardBreakdown {
        let cfg = &self.cfg;
        let target = active_target(state, course);
        let normal = reference_gate(state, course).normal();

        let gate = gate_reward(events.gate_passed, cfg);
        let final_hover = final_hover_reward(&state.p, &course.goal, state.phase == Phase::Hovering, cfg);
        let collision = collision_penalty(events.collided || events.out_of_bounds, cfg);
        let center = center_alignment_potential(&state.v, &normal, cfg.center_alignment);
        let center_shaped = pbrs_delta(center, &mut tracker.prev_center_potential, cfg.gamma);

        let (dist_shaped, vd_fuzzy) = match (cfg.mode.engine(), self.fuzzy.as_deref()) {
            (Some(engine), Some(system)) => {
                let vd = vd_fuzzy_reward((state.p - target).norm(), state.v.norm(), engine, system, cfg);
                (0.0, vd)
            }
            _ => {
                let phi = distance_potential(&state.p, &target, cfg);
                (pbrs_delta(phi, &mut tracker.prev_dist_potential, cfg.gamma), 0.0)
            }
        };

        let mut b = RewardBreakdown { gate, final_hover, dist_shaped, center_shaped, vd_fuzzy, collision, total: 0.0 };
        b.total = b.compose(cfg.mode);
        b
    }
}
