//! JSON policy checkpoints: a format/version header, a shape manifest, the
//! producing run's configuration echoed verbatim, and the flat actor and
//! critic parameter vectors. Floats round-trip exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{param_count, Mlp};
use super::policy::{actor_sizes, critic_sizes, PolicyParams};

pub const FORMAT: &str = "fars-policy";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("cannot access checkpoint {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed checkpoint: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("not a policy checkpoint (format '{0}')")]
    Format(String),
    #[error("unsupported checkpoint version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("checkpoint shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeManifest {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub actor_layers: Vec<usize>,
    pub critic_layers: Vec<usize>,
    pub actor_params: usize,
    pub critic_params: usize,
}

impl ShapeManifest {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Self {
        let actor_layers = actor_sizes(obs_dim, action_dim, hidden);
        let critic_layers = critic_sizes(obs_dim, hidden);
        Self {
            obs_dim,
            action_dim,
            hidden: hidden.to_vec(),
            actor_params: param_count(&actor_layers),
            critic_params: param_count(&critic_layers),
            actor_layers,
            critic_layers,
        }
    }

    /// Rejects manifests whose recorded layer sizes and counts disagree with
    /// each other.
    fn check_consistent(&self) -> Result<(), CheckpointError> {
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.obs_dim == 0 || self.action_dim == 0 {
            return Err(CheckpointError::Shape(format!("degenerate dimensions {self:?}")));
        }
        let expected = Self::new(self.obs_dim, self.action_dim, &self.hidden);
        if *self != expected {
            return Err(CheckpointError::Shape(format!("manifest is inconsistent: recorded {self:?}, implied {expected:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub epoch: usize,
    pub shapes: ShapeManifest,
    pub config: serde_json::Value,
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
}

impl Checkpoint {
    pub fn new(params: &PolicyParams, epoch: usize, config: serde_json::Value) -> Self {
        let hidden = params.actor.sizes()[1..params.actor.sizes().len() - 1].to_vec();
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            epoch,
            shapes: ShapeManifest::new(params.obs_dim(), params.action_dim(), &hidden),
            config,
            actor: params.actor.params().to_vec(),
            critic: params.critic.params().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    /// Parses and validates header and shapes.
    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != FORMAT {
            return Err(CheckpointError::Format(ck.format));
        }
        if ck.version != VERSION {
            return Err(CheckpointError::Version { found: ck.version });
        }
        ck.shapes.check_consistent()?;
        for (name, got, want) in [("actor", ck.actor.len(), ck.shapes.actor_params), ("critic", ck.critic.len(), ck.shapes.critic_params)] {
            if got != want {
                return Err(CheckpointError::Shape(format!("{name} has {got} parameters, manifest says {want}")));
            }
        }
        if !ck.actor.iter().chain(&ck.critic).all(|x| x.is_finite()) {
            return Err(CheckpointError::Shape("non-finite parameter".into()));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_json()).map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Rebuilds the policy after checking it has the interface the caller
    /// will feed it.
    pub fn policy(&self, obs_dim: usize, action_dim: usize) -> Result<PolicyParams, CheckpointError> {
        if (self.shapes.obs_dim, self.shapes.action_dim) != (obs_dim, action_dim) {
            return Err(CheckpointError::Shape(format!(
                "policy maps {} observations to {} actions, environment needs {obs_dim} → {action_dim}",
                self.shapes.obs_dim, self.shapes.action_dim
            )));
        }
        let shape_err = || CheckpointError::Shape("parameter count".into());
        let actor = Mlp::from_params(&self.shapes.actor_layers, self.actor.clone()).ok_or_else(shape_err)?;
        let critic = Mlp::from_params(&self.shapes.critic_layers, self.critic.clone()).ok_or_else(shape_err)?;
        Ok(PolicyParams { actor, critic })
    }
}
