//! Learning stack: dense networks with hand-written reverse-mode gradients,
//! GAE, the clipped PPO objective, Adam, the training loop and FLOPs counts.

mod adam;
mod agent;
mod checkpoint;
mod flops;
mod math;
mod network;
mod rollout;

pub use adam::AdamState;
pub use agent::{feature_len, Agent, PpoConfig, Sample, Trajectory, UpdateStats};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use flops::{flops_estimate, Architecture};
pub use math::{
    clipped_surrogate, gae, joint_log_prob, normalize, ppo_clip_objective, rewards_to_go, value_loss,
    ReturnConvention,
};
pub use network::{ForwardCache, Network, OutputActivation};
pub use rollout::{
    collect_trajectory, evaluate, ppo_decide, resolve_thresholds, run_episode, train, CsiMode, CurvePoint, Decision,
    EpisodeOutcome, Evaluation, PolicySetup, Sampling, EVAL_SEED_OFFSET,
};

use thiserror::Error;

use crate::env::{EnvError, MetricError};
use crate::phy::PhyError;

#[derive(Debug, Error)]
pub enum DrlError {
    #[error("{what}: expected length {expected}, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("invalid {field}: {why}")]
    InvalidConfig { field: &'static str, why: String },
    #[error("update called without samples")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
