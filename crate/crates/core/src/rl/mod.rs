//! From-scratch PPO: networks, Gaussian policy, advantage estimation,
//! update rule, training loop and checkpoints.

pub mod checkpoint;
pub mod mlp;
pub mod policy;
pub mod ppo;
pub mod train;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use policy::PolicyParams;
pub use ppo::PpoConfig;
pub use train::{train, EpochStats, TrainError, TrainSetup, Trainer};
