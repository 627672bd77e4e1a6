use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FuzzyError, LinguisticVariable};
use crate::export::fmt_g9;

/// T-norm combining the antecedent degrees of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AndOperator {
    Min,
    Product,
}

impl AndOperator {
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Min => a.min(b),
            Self::Product => a * b,
        }
    }
}

/// Aggregation of clipped consequents in Mamdani mode. Only `max` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Mamdani,
    Sugeno,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mamdani => "mamdani",
            Self::Sugeno => "sugeno",
        })
    }
}

impl FromStr for Engine {
    type Err = FuzzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mamdani" => Ok(Self::Mamdani),
            "sugeno" => Ok(Self::Sugeno),
            other => Err(FuzzyError::UnknownEngine(other.to_string())),
        }
    }
}

/// `if v is <velocity> and d is <distance> then z is <consequent>` with the
/// zero-order Sugeno constant for the same cell stored alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub velocity: String,
    pub distance: String,
    pub consequent: String,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy)]
struct ResolvedRule {
    velocity: usize,
    distance: usize,
    consequent: usize,
    constant: f64,
}

/// Two-input fuzzy system over normalized velocity and distance.
///
/// Immutable once built; the consequent memberships are pre-sampled on the
/// defuzzification grid so Mamdani inference only clips and aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct FuzzySystem {
    velocity: LinguisticVariable,
    distance: LinguisticVariable,
    output: LinguisticVariable,
    rules: Vec<FuzzyRule>,
    mamdani_and: AndOperator,
    sugeno_and: AndOperator,
    aggregation: Aggregation,
    defuzz_resolution: usize,
    resolved: Vec<ResolvedRule>,
    samples: Vec<f64>,
    consequent_samples: Vec<Vec<f64>>,
}

/// Construction options that are not part of the variables or rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub mamdani_and: AndOperator,
    pub sugeno_and: AndOperator,
    pub defuzz_resolution: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { mamdani_and: AndOperator::Min, sugeno_and: AndOperator::Product, defuzz_resolution: 201 }
    }
}

pub const VELOCITY_LABELS: [&str; 3] = ["slow", "medium", "fast"];
pub const DISTANCE_LABELS: [&str; 3] = ["near", "medium", "far"];
pub const OUTPUT_LABELS: [&str; 5] = ["very-low", "low", "medium", "high", "very-high"];

/// Default Sugeno constants, rows near→far distance, columns slow→fast velocity.
pub const DEFAULT_CONSTANTS: [[f64; 3]; 3] = [[1.0, 0.8, 0.6], [0.6, 0.6, 0.6], [0.2, 0.4, 0.5]];

/// Default Mamdani consequents, same layout. Each velocity column steps
/// strictly down the output terms from near to far; with max aggregation a
/// consequent shared by two distance rows makes the centroid rise again
/// with distance.
pub const DEFAULT_CONSEQUENTS: [[&str; 3]; 3] =
    [["very-high", "high", "high"], ["medium", "medium", "medium"], ["very-low", "low", "low"]];

impl FuzzySystem {
    pub fn new(
        velocity: LinguisticVariable,
        distance: LinguisticVariable,
        output: LinguisticVariable,
        rules: Vec<FuzzyRule>,
        options: EngineOptions,
    ) -> Result<Self, FuzzyError> {
        if options.defuzz_resolution < 2 {
            return Err(FuzzyError::BadResolution(options.defuzz_resolution));
        }
        let resolve = |var: &LinguisticVariable, label: &str| {
            var.term_index(label).ok_or_else(|| FuzzyError::UnknownLabel {
                variable: var.name().to_string(),
                label: label.to_string(),
            })
        };
        let mut resolved = Vec::with_capacity(rules.len());
        let mut seen = vec![false; velocity.terms().len() * distance.terms().len()];
        for rule in &rules {
            let r = ResolvedRule {
                velocity: resolve(&velocity, &rule.velocity)?,
                distance: resolve(&distance, &rule.distance)?,
                consequent: resolve(&output, &rule.consequent)?,
                constant: rule.constant,
            };
            if !(0.0..=1.0).contains(&r.constant) {
                return Err(FuzzyError::ConstantOutOfRange(r.constant));
            }
            let cell = r.distance * velocity.terms().len() + r.velocity;
            if std::mem::replace(&mut seen[cell], true) {
                return Err(FuzzyError::DuplicateRule { velocity: rule.velocity.clone(), distance: rule.distance.clone() });
            }
            resolved.push(r);
        }
        if let Some(cell) = seen.iter().position(|s| !s) {
            let nv = velocity.terms().len();
            return Err(FuzzyError::MissingRule {
                velocity: velocity.terms()[cell % nv].label.clone(),
                distance: distance.terms()[cell / nv].label.clone(),
            });
        }

        let (lo, hi) = output.universe();
        let n = options.defuzz_resolution;
        let samples: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let consequent_samples = output
            .terms()
            .iter()
            .map(|t| samples.iter().map(|&z| t.membership.eval(z)).collect())
            .collect();

        Ok(Self {
            velocity,
            distance,
            output,
            rules,
            mamdani_and: options.mamdani_and,
            sugeno_and: options.sugeno_and,
            aggregation: Aggregation::Max,
            defuzz_resolution: n,
            resolved,
            samples,
            consequent_samples,
        })
    }

    /// Three-term velocity and distance partitions of `[0, 1]`, a five-term
    /// output partition, and a full 3×3 rule grid (rows near→far, columns
    /// slow→fast). Without an explicit consequent table each Mamdani
    /// consequent is the output term whose apex is nearest the constant.
    pub fn velocity_distance(
        constants: [[f64; 3]; 3],
        consequents: Option<[[&str; 3]; 3]>,
        options: EngineOptions,
    ) -> Result<Self, FuzzyError> {
        let velocity = LinguisticVariable::uniform_partition("velocity", (0.0, 1.0), &VELOCITY_LABELS)?;
        let distance = LinguisticVariable::uniform_partition("distance", (0.0, 1.0), &DISTANCE_LABELS)?;
        let output = LinguisticVariable::uniform_partition("reward", (0.0, 1.0), &OUTPUT_LABELS)?;
        let mut rules = Vec::with_capacity(9);
        for (di, row) in constants.iter().enumerate() {
            for (vi, &c) in row.iter().enumerate() {
                rules.push(FuzzyRule {
                    velocity: VELOCITY_LABELS[vi].to_string(),
                    distance: DISTANCE_LABELS[di].to_string(),
                    consequent: match consequents {
                        Some(table) => table[di][vi].to_string(),
                        None => nearest_term(&output, c).to_string(),
                    },
                    constant: c,
                });
            }
        }
        Self::new(velocity, distance, output, rules, options)
    }

    pub fn default_velocity_distance() -> Self {
        Self::velocity_distance(DEFAULT_CONSTANTS, Some(DEFAULT_CONSEQUENTS), EngineOptions::default()).expect("default fuzzy system is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, FuzzyError> {
        serde_json::from_str(text).map_err(|e| FuzzyError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fuzzy system serializes")
    }

    pub fn velocity(&self) -> &LinguisticVariable {
        &self.velocity
    }

    pub fn distance(&self) -> &LinguisticVariable {
        &self.distance
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn and_operator(&self, engine: Engine) -> AndOperator {
        match engine {
            Engine::Mamdani => self.mamdani_and,
            Engine::Sugeno => self.sugeno_and,
        }
    }

    pub fn defuzz_resolution(&self) -> usize {
        self.defuzz_resolution
    }

    /// Firing strength of each rule (in rule order) for the clamped inputs.
    pub fn firing_strengths(&self, v_hat: f64, d_hat: f64, and: AndOperator) -> Vec<f64> {
        let vd = self.velocity.fuzzify(v_hat);
        let dd = self.distance.fuzzify(d_hat);
        self.resolved
            .iter()
            .map(|r| firing_strength(&[vd[r.velocity], dd[r.distance]], and))
            .collect()
    }

    pub fn infer(&self, engine: Engine, v_hat: f64, d_hat: f64) -> f64 {
        match engine {
            Engine::Mamdani => self.mamdani(v_hat, d_hat),
            Engine::Sugeno => self.sugeno(v_hat, d_hat),
        }
    }

    /// Clip each consequent at its rule's strength, aggregate by max, and
    /// return the discrete centroid over the output universe.
    pub fn mamdani(&self, v_hat: f64, d_hat: f64) -> f64 {
        let strengths = self.firing_strengths(v_hat, d_hat, self.mamdani_and);
        let mut aggregate = vec![0.0f64; self.samples.len()];
        for (rule, &s) in self.resolved.iter().zip(&strengths) {
            if s <= 0.0 {
                continue;
            }
            let shape = &self.consequent_samples[rule.consequent];
            for (agg, &mu) in aggregate.iter_mut().zip(shape) {
                *agg = agg.max(mu.min(s));
            }
        }
        let (num, den) = aggregate
            .iter()
            .zip(&self.samples)
            .fold((0.0, 0.0), |(n, d), (&mu, &z)| (n + mu * z, d + mu));
        if den > 0.0 {
            num / den
        } else {
            let (lo, hi) = self.output.universe();
            0.5 * (lo + hi)
        }
    }

    /// Zero-order Sugeno: firing-strength weighted mean of rule constants.
    pub fn sugeno(&self, v_hat: f64, d_hat: f64) -> f64 {
        let strengths = self.firing_strengths(v_hat, d_hat, self.sugeno_and);
        let (num, den) = self
            .resolved
            .iter()
            .zip(&strengths)
            .fold((0.0, 0.0), |(n, d), (r, &w)| (n + w * r.constant, d + w));
        if den > 0.0 {
            num / den
        } else {
            let (lo, hi) = self.output.universe();
            0.5 * (lo + hi)
        }
    }

    /// Crisp outputs on an `nx × ny` grid over the unit square; row `i` is
    /// `v̂ = i/(nx-1)`, column `j` is `d̂ = j/(ny-1)`.
    pub fn surface_grid(&self, engine: Engine, nx: usize, ny: usize) -> Result<SurfaceGrid, FuzzyError> {
        if nx < 2 || ny < 2 {
            return Err(FuzzyError::BadResolution(nx.min(ny)));
        }
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let v = i as f64 / (nx - 1) as f64;
            for j in 0..ny {
                let d = j as f64 / (ny - 1) as f64;
                values.push(self.infer(engine, v, d));
            }
        }
        Ok(SurfaceGrid { nx, ny, values })
    }
}

/// Combine one antecedent degree per input variable.
pub fn firing_strength(degrees: &[f64], and: AndOperator) -> f64 {
    degrees.iter().copied().reduce(|a, b| and.combine(a, b)).unwrap_or(0.0)
}

fn nearest_term(output: &LinguisticVariable, value: f64) -> &str {
    output
        .terms()
        .iter()
        .min_by(|a, b| {
            let da = (a.membership.peak() - value).abs();
            let db = (b.membership.peak() - value).abs();
            da.total_cmp(&db)
        })
        .map(|t| t.label.as_str())
        .expect("output variable has terms")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[i * ny + j]`.
    pub values: Vec<f64>,
}

impl SurfaceGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn v_hat(&self, i: usize) -> f64 {
        i as f64 / (self.nx - 1) as f64
    }

    pub fn d_hat(&self, j: usize) -> f64 {
        j as f64 / (self.ny - 1) as f64
    }

    /// Largest absolute difference between horizontally or vertically
    /// adjacent cells.
    pub fn max_adjacent_jump(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nx {
            for j in 0..self.ny {
                if i + 1 < self.nx {
                    worst = worst.max((self.at(i + 1, j) - self.at(i, j)).abs());
                }
                if j + 1 < self.ny {
                    worst = worst.max((self.at(i, j + 1) - self.at(i, j)).abs());
                }
            }
        }
        worst
    }

    /// `v_hat,d_hat,reward` CSV, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v_hat,d_hat,reward\n");
        for i in 0..self.nx {
            for j in 0..self.ny {
                out.push_str(&format!("{},{},{}\n", fmt_g9(self.v_hat(i)), fmt_g9(self.d_hat(j)), fmt_g9(self.at(i, j))));
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RawSystem {
    velocity: LinguisticVariable,
    distance: LinguisticVariable,
    output: LinguisticVariable,
    rules: Vec<FuzzyRule>,
    #[serde(default = "default_mamdani_and")]
    mamdani_and: AndOperator,
    #[serde(default = "default_sugeno_and")]
    sugeno_and: AndOperator,
    #[serde(default)]
    aggregation: Aggregation,
    #[serde(default = "default_resolution")]
    defuzz_resolution: usize,
}

fn default_mamdani_and() -> AndOperator {
    EngineOptions::default().mamdani_and
}

fn default_sugeno_and() -> AndOperator {
    EngineOptions::default().sugeno_and
}

fn default_resolution() -> usize {
    EngineOptions::default().defuzz_resolution
}

impl TryFrom<RawSystem> for FuzzySystem {
    type Error = FuzzyError;

    fn try_from(raw: RawSystem) -> Result<Self, Self::Error> {
        let options = EngineOptions {
            mamdani_and: raw.mamdani_and,
            sugeno_and: raw.sugeno_and,
            defuzz_resolution: raw.defuzz_resolution,
        };
        Self::new(raw.velocity, raw.distance, raw.output, raw.rules, options)
    }
}

impl From<FuzzySystem> for RawSystem {
    fn from(s: FuzzySystem) -> Self {
        RawSystem {
            velocity: s.velocity,
            distance: s.distance,
            output: s.output,
            rules: s.rules,
            mamdani_and: s.mamdani_and,
            sugeno_and: s.sugeno_and,
            aggregation: s.aggregation,
            defuzz_resolution: s.defuzz_resolution,
        }
    }
}
