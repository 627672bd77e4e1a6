//! Seeded zigzag gate courses at three difficulty levels.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Drone spawn point; the first gate is one sampled spacing ahead of it.
pub const SPAWN: Vec3 = Vec3::new(0.0, 0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Easy,
    Medium,
    Hard,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Easy, Level::Medium, Level::Hard];
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Easy => "easy",
            Level::Medium => "medium",
            Level::Hard => "hard",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Level::Easy),
            "medium" => Ok(Level::Medium),
            "hard" => Ok(Level::Hard),
            other => Err(format!("unknown level `{other}` (expected easy, medium or hard)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyParams {
    pub n_gates: usize,
    /// Candidate |y| offsets of intermediate gates, m.
    pub lateral_offsets: Vec<f64>,
    /// Half-width of the uniform perturbation added to the sampled offset, m.
    pub lateral_jitter: f64,
    /// Candidate gaps between consecutive gates along x, m.
    pub longitudinal_spacings: Vec<f64>,
    /// Candidate gate-centre heights, m.
    pub heights: Vec<f64>,
    pub diameter: f64,
    /// Yaw is drawn uniformly from `[-yaw_range, yaw_range]`, radians.
    pub yaw_range: f64,
}

impl DifficultyParams {
    pub fn mean_spacing(&self) -> f64 {
        self.longitudinal_spacings.iter().sum::<f64>() / self.longitudinal_spacings.len() as f64
    }
}

pub fn difficulty_params(level: Level) -> DifficultyParams {
    let lateral_offsets = vec![0.5, 0.75, 1.0, 1.25, 1.5, 1.75];
    match level {
        Level::Easy => DifficultyParams {
            n_gates: 6,
            lateral_offsets,
            lateral_jitter: 0.1,
            longitudinal_spacings: vec![1.5, 1.75, 2.0],
            heights: vec![1.0],
            diameter: 0.60,
            yaw_range: 10f64.to_radians(),
        },
        Level::Medium => DifficultyParams {
            n_gates: 8,
            lateral_offsets,
            lateral_jitter: 0.1,
            longitudinal_spacings: vec![1.0, 1.25, 1.5],
            heights: vec![0.5, 1.0, 1.5, 2.0],
            diameter: 0.60,
            yaw_range: 10f64.to_radians(),
        },
        Level::Hard => DifficultyParams {
            diameter: 0.45,
            yaw_range: 60f64.to_radians(),
            ..difficulty_params(Level::Medium)
        },
    }
}

/// A circular gate. Its normal is horizontal, `yaw` radians from +x, and
/// points along the direction of travel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub center: Vec3,
    pub yaw: f64,
    pub diameter: f64,
    pub height: f64,
    #[serde(skip)]
    pub index: usize,
}

impl GateSpec {
    pub fn normal(&self) -> Vec3 {
        Vec3::new(self.yaw.cos(), self.yaw.sin(), 0.0)
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// Expresses a world-frame vector in the gate frame (x along the
    /// normal, z up).
    pub fn to_gate_frame(&self, v: &Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl Bounds {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawCourse")]
pub struct CourseSpec {
    pub gates: Vec<GateSpec>,
    pub goal: Vec3,
    pub bounds: Bounds,
}

#[derive(Deserialize)]
struct RawCourse {
    gates: Vec<GateSpec>,
    goal: Vec3,
    bounds: Bounds,
}

impl From<RawCourse> for CourseSpec {
    fn from(raw: RawCourse) -> Self {
        let mut gates = raw.gates;
        for (i, g) in gates.iter_mut().enumerate() {
            g.index = i;
        }
        CourseSpec { gates, goal: raw.goal, bounds: raw.bounds }
    }
}

impl CourseSpec {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("course serializes")
    }

    pub fn n_gates(&self) -> usize {
        self.gates.len()
    }

    /// Returns a copy with every position shifted by `offset`.
    pub fn translated(&self, offset: &Vec3) -> CourseSpec {
        let mut out = self.clone();
        for g in &mut out.gates {
            g.center += offset;
        }
        out.goal += offset;
        out.bounds.min += offset;
        out.bounds.max += offset;
        out
    }
}

/// Deterministic in `(level, seed)`.
pub fn generate_course(level: Level, seed: u64) -> CourseSpec {
    let params = difficulty_params(level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n_gates;
    let mut side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let mut x = SPAWN.x;
    let mut gates = Vec::with_capacity(n);
    for index in 0..n {
        x += pick(&mut rng, &params.longitudinal_spacings);
        let y = if index == 0 || index + 1 == n {
            0.0
        } else {
            let offset = pick(&mut rng, &params.lateral_offsets)
                + rng.gen_range(-params.lateral_jitter..params.lateral_jitter);
            side = -side;
            -side * offset
        };
        let height = pick(&mut rng, &params.heights);
        let yaw = if params.yaw_range > 0.0 { rng.gen_range(-params.yaw_range..=params.yaw_range) } else { 0.0 };
        gates.push(GateSpec { center: Vec3::new(x, y, height), yaw, diameter: params.diameter, height, index });
    }
    let last = gates.last().expect("at least one gate");
    let goal = last.center + last.normal() * params.mean_spacing();
    let bounds = Bounds { min: Vec3::new(-1.0, -3.0, 0.0), max: Vec3::new(last.center.x + 3.0, 3.0, 3.0) };
    CourseSpec { gates, goal, bounds }
}

fn pick(rng: &mut ChaCha8Rng, set: &[f64]) -> f64 {
    set[rng.gen_range(0..set.len())]
}

#[derive(Debug, Clone, PartialEq)]
pub enum CourseViolation {
    NoGates,
    EndpointOffAxis { index: usize, y: f64 },
    AlternationBroken { index: usize },
    NonIncreasingX { index: usize },
    GoalNotBeyondLastGate,
    BadGateSize { index: usize },
}

/// Empty iff the course satisfies every layout invariant.
pub fn validate_course(course: &CourseSpec) -> Vec<CourseViolation> {
    let gates = &course.gates;
    let mut out = Vec::new();
    let Some(last) = gates.last() else {
        out.push(CourseViolation::NoGates);
        return out;
    };
    let n = gates.len();
    for g in gates {
        if !(g.diameter > 0.0 && g.height > 0.0) {
            out.push(CourseViolation::BadGateSize { index: g.index });
        }
    }
    let endpoints = if n == 1 { vec![0] } else { vec![0, n - 1] };
    for i in endpoints {
        if gates[i].center.y != 0.0 {
            out.push(CourseViolation::EndpointOffAxis { index: i, y: gates[i].center.y });
        }
    }
    for i in 1..n.saturating_sub(1) {
        let y = gates[i].center.y;
        let flipped = i == 1 || y * gates[i - 1].center.y < 0.0;
        if y == 0.0 || !flipped {
            out.push(CourseViolation::AlternationBroken { index: i });
        }
    }
    for i in 1..n {
        if gates[i].center.x <= gates[i - 1].center.x {
            out.push(CourseViolation::NonIncreasingX { index: i });
        }
    }
    if course.goal.x <= last.center.x {
        out.push(CourseViolation::GoalNotBeyondLastGate);
    }
    out
}
