//! Experiment configuration: line-oriented `key = value` text with dotted
//! section prefixes (`ppo.lr0 = 3e-4`, `sim.a_max = 6`). Every key not given
//! keeps its default; unknown keys and unparsable values are rejected with
//! the key named.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use fars_core::course::Level;
use fars_core::reward::{RewardConfig, RewardMode};
use fars_core::rl::PpoConfig;
use fars_core::sim::SimConfig;

/// Seeds used when the config does not list its own.
pub const DEFAULT_SEEDS: [u64; 5] = [5, 8, 16, 32, 36];

/// Keys owned by another key and therefore not settable directly.
const DERIVED_KEYS: [(&str, &str); 2] = [("reward.mode", "reward_mode"), ("ppo.seed", "seeds")];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` is set by `{owner}`")]
    DerivedKey { line: usize, key: String, owner: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
}

impl ConfigError {
    pub fn value(key: &str, message: impl ToString) -> Self {
        ConfigError::Value { key: key.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub level: Level,
    pub reward_mode: RewardMode,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub fuzzy_system_path: Option<PathBuf>,
    pub ppo: PpoConfig,
    pub reward: RewardConfig,
    pub sim: SimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            level: Level::Easy,
            reward_mode: RewardMode::Pfbrs,
            seeds: DEFAULT_SEEDS.to_vec(),
            output_dir: PathBuf::from("runs"),
            fuzzy_system_path: None,
            ppo: PpoConfig::default(),
            reward: RewardConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut tree = serde_json::to_value(Self::default()).expect("config serializes");
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax { line, text: raw.trim().to_string() })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, text: raw.trim().to_string() });
            }
            if let Some((_, owner)) = DERIVED_KEYS.iter().find(|(k, _)| *k == key) {
                return Err(ConfigError::DerivedKey { line, key: key.into(), owner: owner.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate { line, key: key.into() });
            }
            let slot = lookup(&mut tree, key).ok_or_else(|| ConfigError::UnknownKey { line, key: key.into() })?;
            *slot = parse_like(slot, value).map_err(|m| ConfigError::value(key, m))?;
            // surface enum and type errors against the key that caused them
            serde_json::from_value::<ExperimentConfig>(tree.clone()).map_err(|e| ConfigError::value(key, e))?;
        }
        let cfg: ExperimentConfig = serde_json::from_value(tree).map_err(|e| ConfigError::value("config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(ConfigError::value("seeds", "at least one seed is required"));
        }
        let unique: BTreeSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            return Err(ConfigError::value("seeds", "seeds must be distinct"));
        }
        self.ppo.validate().map_err(|e| ConfigError::value("ppo", e))?;
        self.sim.validate().map_err(|e| ConfigError::value("sim", e))?;
        self.reward_config().validate().map_err(|e| ConfigError::value("reward", e))?;
        Ok(())
    }

    /// The reward section with the experiment's mode filled in.
    pub fn reward_config(&self) -> RewardConfig {
        RewardConfig { mode: self.reward_mode, ..self.reward }
    }

    /// The PPO section for one seed of the run.
    pub fn ppo_for_seed(&self, seed: u64) -> PpoConfig {
        PpoConfig { seed, ..self.ppo.clone() }
    }

    /// Every settable key with its current value, in `key = value` form;
    /// parsing the result reproduces this config.
    pub fn to_text(&self) -> String {
        let tree = serde_json::to_value(self).expect("config serializes");
        let mut lines = Vec::new();
        flatten("", &tree, &mut lines);
        lines.retain(|(k, _)| !DERIVED_KEYS.iter().any(|(d, _)| d == k));
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn lookup<'a>(tree: &'a mut Value, key: &str) -> Option<&'a mut Value> {
    let mut node = tree;
    for part in key.split('.') {
        node = node.as_object_mut()?.get_mut(part)?;
    }
    // a section name alone is not a settable key
    (!node.is_object()).then_some(node)
}

/// Parses `text` as a value of the same kind as `current`.
fn parse_like(current: &Value, text: &str) -> Result<Value, String> {
    let number = |t: &str, integral: bool| -> Result<Value, String> {
        if integral {
            t.parse::<u64>().map(Value::from).map_err(|_| format!("expected a non-negative integer, got `{t}`"))
        } else {
            let x: f64 = t.parse().map_err(|_| format!("expected a number, got `{t}`"))?;
            serde_json::Number::from_f64(x).map(Value::Number).ok_or_else(|| format!("expected a finite number, got `{t}`"))
        }
    };
    match current {
        Value::Bool(_) => text.parse::<bool>().map(Value::Bool).map_err(|_| format!("expected true or false, got `{text}`")),
        Value::Number(n) => number(text, n.is_u64()),
        Value::Array(items) => {
            let integral = items.first().map_or(true, |v| v.as_u64().is_some());
            let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            parts.into_iter().map(|p| number(p, integral)).collect::<Result<Vec<_>, _>>().map(Value::Array)
        }
        // strings, enum names and optional paths
        Value::String(_) | Value::Null => Ok(if text.is_empty() { Value::Null } else { Value::String(text.to_string()) }),
        Value::Object(_) => Err("a section cannot be assigned".into()),
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => flatten_map(prefix, map, out),
        Value::Array(items) => out.push((prefix.to_string(), items.iter().map(scalar_text).collect::<Vec<_>>().join(", "))),
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        flatten(&key, v, out);
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("# nothing\n\n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn dotted_keys_and_lists() {
        let cfg = ExperimentConfig::parse(
            "level = hard\nreward_mode = fars_sugeno\nseeds = 1, 2\nppo.lr0 = 1e-3  # faster\nppo.hidden = 64,32\nsim.a_max = 6\nreward.center_alignment = aligned\n",
        )
        .unwrap();
        assert_eq!(cfg.level, Level::Hard);
        assert_eq!(cfg.reward_config().mode, RewardMode::FarsSugeno);
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.ppo.lr0, 1e-3);
        assert_eq!(cfg.ppo.hidden, vec![64, 32]);
        assert_eq!(cfg.sim.a_max, 6.0);
        assert_eq!(cfg.ppo_for_seed(2).seed, 2);
    }

    #[test]
    fn errors_name_the_key() {
        let err = |t: &str| ExperimentConfig::parse(t).unwrap_err();
        assert_eq!(err("ppo.lr = 1"), ConfigError::UnknownKey { line: 1, key: "ppo.lr".into() });
        assert!(matches!(err("level = extreme"), ConfigError::Value { key, .. } if key == "level"));
        assert!(matches!(err("ppo.epochs = -3"), ConfigError::Value { key, .. } if key == "ppo.epochs"));
        assert!(matches!(err("ppo.gamma = 1.5"), ConfigError::Value { key, .. } if key == "ppo"));
        assert!(matches!(err("seeds ="), ConfigError::Value { key, .. } if key == "seeds"));
        assert!(matches!(err("reward.mode = pfbrs"), ConfigError::DerivedKey { .. }));
        assert!(matches!(err("ppo = 3"), ConfigError::UnknownKey { .. }));
        assert!(matches!(err("level easy"), ConfigError::Syntax { line: 1, .. }));
        assert!(matches!(err("level = easy\nlevel = hard"), ConfigError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.ppo.lr0 = 0.1 + 0.2;
        cfg.fuzzy_system_path = Some("fs.json".into());
        cfg.reward_mode = RewardMode::FarsMamdani;
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        let plain = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&plain.to_text()).unwrap(), plain);
    }
}
