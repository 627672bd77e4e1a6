//! Two-input fuzzy inference (Mamdani with centroid defuzzification and
//! zero-order Sugeno) for the velocity–distance reward surface.

mod membership;
mod system;
mod variable;

pub use membership::MembershipFunction;
pub use system::{
    firing_strength, AndOperator, Aggregation, Engine, EngineOptions, FuzzyRule, FuzzySystem, SurfaceGrid,
    DEFAULT_CONSEQUENTS, DEFAULT_CONSTANTS, DISTANCE_LABELS, OUTPUT_LABELS, VELOCITY_LABELS,
};
pub use variable::{LinguisticVariable, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuzzyError {
    #[error("membership parameters must be finite and non-decreasing: {0:?}")]
    MalformedMembership(Vec<f64>),
    #[error("variable `{variable}` has an empty universe [{lo}, {hi}]")]
    BadUniverse { variable: String, lo: f64, hi: f64 },
    #[error("variable `{0}` has no terms")]
    NoTerms(String),
    #[error("term `{term}` of `{variable}` extends outside its universe")]
    SupportOutsideUniverse { variable: String, term: String },
    #[error("variable `{variable}` has two terms labelled `{label}`")]
    DuplicateLabel { variable: String, label: String },
    #[error("terms of `{variable}` do not cover x = {x}")]
    NotCovered { variable: String, x: f64 },
    #[error("unknown term `{label}` for variable `{variable}`")]
    UnknownLabel { variable: String, label: String },
    #[error("rule constant {0} is outside [0, 1]")]
    ConstantOutOfRange(f64),
    #[error("more than one rule for velocity `{velocity}` and distance `{distance}`")]
    DuplicateRule { velocity: String, distance: String },
    #[error("no rule for velocity `{velocity}` and distance `{distance}`")]
    MissingRule { velocity: String, distance: String },
    #[error("grid/defuzzification resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("unknown inference engine `{0}` (expected mamdani or sugeno)")]
    UnknownEngine(String),
    #[error("invalid fuzzy system JSON: {0}")]
    Json(String),
}
