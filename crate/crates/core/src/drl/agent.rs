use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::math::{clipped_surrogate, gae, joint_log_prob, normalize, rewards_to_go, ReturnConvention};
use super::network::{Network, OutputActivation};
use super::DrlError;
use crate::Real;

/// Hyperparameters of the PPO learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub discount: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub minibatch: usize,
    pub trajectories_per_update: usize,
    /// Training length in episodes.
    pub episodes: u64,
    pub epochs_per_update: usize,
    pub hidden: usize,
    pub episode_length: u32,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub normalize_advantages: bool,
    pub returns: ReturnConvention,
    /// Evaluate the frozen policy every this many training episodes.
    pub eval_every_episodes: u64,
    /// Poll a device iff its posterior probability exceeds ½ during evaluation.
    pub eval_greedy: bool,
    /// Write a checkpoint every this many updates (0 disables).
    pub checkpoint_every_updates: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            discount: 0.3,
            gae_lambda: 0.95,
            clip: 0.2,
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            minibatch: 128,
            trajectories_per_update: 8,
            episodes: 10_000,
            epochs_per_update: 4,
            hidden: 256,
            episode_length: 200,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            normalize_advantages: true,
            returns: ReturnConvention::PerStep,
            eval_every_episodes: 250,
            eval_greedy: false,
            checkpoint_every_updates: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), DrlError> {
        let bad = |field: &'static str, why: String| Err(DrlError::InvalidConfig { field, why });
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount", format!("{} outside [0, 1)", self.discount));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda", format!("{} outside [0, 1]", self.gae_lambda));
        }
        if !(0.0..1.0).contains(&self.clip) {
            return bad("clip", format!("{} outside [0, 1)", self.clip));
        }
        for (field, lr) in [("lr_actor", self.lr_actor), ("lr_critic", self.lr_critic)] {
            if !(lr >= 0.0 && lr.is_finite()) {
                return bad(field, format!("{lr} must be finite and >= 0"));
            }
        }
        for (field, n) in [
            ("minibatch", self.minibatch),
            ("trajectories_per_update", self.trajectories_per_update),
            ("epochs_per_update", self.epochs_per_update),
            ("hidden", self.hidden),
        ] {
            if n == 0 {
                return bad(field, "must be positive".into());
            }
        }
        if self.episode_length == 0 {
            return bad("episode_length", "must be positive".into());
        }
        if self.eval_every_episodes == 0 {
            return bad("eval_every_episodes", "must be positive".into());
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || self.adam_eps <= 0.0 {
            return bad("adam", "betas must lie in [0, 1) and epsilon be positive".into());
        }
        Ok(())
    }
}

/// One episode collected with the posterior policy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory<T> {
    pub features: Vec<Vec<T>>,
    pub actions: Vec<Vec<bool>>,
    /// Branch probabilities of the task policy π at collection time.
    pub behavior_probs: Vec<Vec<T>>,
    pub rewards: Vec<T>,
    pub values: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Flattened training sample.
#[derive(Debug, Clone)]
pub struct Sample<T> {
    pub features: Vec<T>,
    pub action: Vec<bool>,
    pub old_log_prob: T,
    pub advantage: T,
    pub ret: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub surrogate: f64,
    pub value_loss: f64,
    pub clipped_fraction: f64,
}

/// Branching policy network, value network and their optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent<T> {
    pub policy: Network<T>,
    pub value: Network<T>,
    pub policy_opt: AdamState<T>,
    pub value_opt: AdamState<T>,
    pub updates: u64,
    pub episodes_seen: u64,
}

/// Feature length for `num_devices` devices.
pub fn feature_len(num_devices: usize) -> usize {
    5 * num_devices + 1
}

impl<T: Real> Agent<T> {
    pub fn new<R: Rng + ?Sized>(num_devices: usize, hidden: usize, config: &PpoConfig, rng: &mut R) -> Self {
        let input = feature_len(num_devices);
        let policy = Network::init(&[input, hidden, hidden, num_devices], OutputActivation::Sigmoid, rng);
        let value = Network::init(&[input, hidden, hidden, 1], OutputActivation::Identity, rng);
        Self::from_networks(policy, value, config)
    }

    pub fn from_networks(policy: Network<T>, value: Network<T>, config: &PpoConfig) -> Self {
        let adam = |n| AdamState::with_hyper(n, T::lit(config.adam_beta1), T::lit(config.adam_beta2), T::lit(config.adam_eps));
        Self {
            policy_opt: adam(policy.num_params()),
            value_opt: adam(value.num_params()),
            policy,
            value,
            updates: 0,
            episodes_seen: 0,
        }
    }

    pub fn num_devices(&self) -> usize {
        self.policy.output_size()
    }

    pub fn hidden(&self) -> usize {
        self.policy.sizes()[1]
    }

    pub fn branch_probs(&self, features: &[T]) -> Result<Vec<T>, DrlError> {
        self.policy.forward(features)
    }

    pub fn state_value(&self, features: &[T]) -> Result<T, DrlError> {
        Ok(self.value.forward(features)?[0])
    }

    /// Mean clipped surrogate over `batch` and the gradient of its negation.
    pub fn policy_loss_gradient(&self, batch: &[&Sample<T>], clip: T) -> Result<(T, Vec<T>, usize), DrlError> {
        let n = T::from_usize(batch.len()).expect("batch size");
        let mut grads = vec![T::zero(); self.policy.num_params()];
        let mut objective = T::zero();
        let mut clipped = 0;
        for s in batch {
            let cache = self.policy.forward_cached(&s.features)?;
            let logp = joint_log_prob(&cache.output, &s.action);
            let (value, slope) = clipped_surrogate(logp, s.old_log_prob, s.advantage, clip);
            objective += value;
            if slope == T::zero() {
                clipped += 1;
                continue;
            }
            // d ln π(a) / d z_k = a_k − p_k
            let grad_logits: Vec<T> = cache
                .output
                .iter()
                .zip(&s.action)
                .map(|(&p, &a)| {
                    let a = if a { T::one() } else { T::zero() };
                    -(slope / n) * (a - p)
                })
                .collect();
            self.policy.backward(&cache, &grad_logits, &mut grads);
        }
        Ok((objective / n, grads, clipped))
    }

    /// Mean squared error of the value network against `ret` and its gradient.
    pub fn value_loss_gradient(&self, batch: &[&Sample<T>]) -> Result<(T, Vec<T>), DrlError> {
        let n = T::from_usize(batch.len()).expect("batch size");
        let mut grads = vec![T::zero(); self.value.num_params()];
        let mut loss = T::zero();
        for s in batch {
            let cache = self.value.forward_cached(&s.features)?;
            let err = cache.output[0] - s.ret;
            loss += err * err;
            self.value.backward(&cache, &[T::lit(2.0) * err / n], &mut grads);
        }
        Ok((loss / n, grads))
    }

    /// Flattens trajectories into samples with advantages and returns.
    pub fn prepare_samples(&self, trajectories: &[Trajectory<T>], config: &PpoConfig) -> Vec<Sample<T>> {
        let gamma = T::lit(config.discount);
        let lambda = T::lit(config.gae_lambda);
        let mut samples = Vec::new();
        for traj in trajectories {
            let returns = rewards_to_go(&traj.rewards, gamma, config.returns);
            let mut values = traj.values.clone();
            values.push(T::zero());
            let adv = gae(&traj.rewards, &values, gamma, lambda);
            for t in 0..traj.len() {
                samples.push(Sample {
                    features: traj.features[t].clone(),
                    action: traj.actions[t].clone(),
                    old_log_prob: joint_log_prob(&traj.behavior_probs[t], &traj.actions[t]),
                    advantage: adv[t],
                    ret: returns[t],
                });
            }
        }
        if config.normalize_advantages {
            let mut adv: Vec<T> = samples.iter().map(|s| s.advantage).collect();
            normalize(&mut adv);
            for (s, a) in samples.iter_mut().zip(adv) {
                s.advantage = a;
            }
        }
        samples
    }

    /// One PPO update: several epochs of shuffled minibatch steps on both networks.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        trajectories: &[Trajectory<T>],
        config: &PpoConfig,
        rng: &mut R,
    ) -> Result<UpdateStats, DrlError> {
        let samples = self.prepare_samples(trajectories, config);
        if samples.is_empty() {
            return Err(DrlError::EmptyBatch);
        }
        let clip = T::lit(config.clip);
        let lr_actor = T::lit(config.lr_actor);
        let lr_critic = T::lit(config.lr_critic);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut stats = UpdateStats::default();
        let mut batches = 0usize;
        let mut clipped = 0usize;
        for _ in 0..config.epochs_per_update {
            order.shuffle(rng);
            for chunk in order.chunks(config.minibatch) {
                let batch: Vec<&Sample<T>> = chunk.iter().map(|&i| &samples[i]).collect();
                let (objective, pg, c) = self.policy_loss_gradient(&batch, clip)?;
                self.policy_opt.step(self.policy.params_mut(), &pg, lr_actor);
                let (loss, vg) = self.value_loss_gradient(&batch)?;
                self.value_opt.step(self.value.params_mut(), &vg, lr_critic);
                stats.surrogate += objective.as_f64();
                stats.value_loss += loss.as_f64();
                clipped += c;
                batches += 1;
            }
        }
        stats.surrogate /= batches as f64;
        stats.value_loss /= batches as f64;
        stats.clipped_fraction = clipped as f64 / (samples.len() * config.epochs_per_update) as f64;
        self.updates += 1;
        Ok(stats)
    }
}
