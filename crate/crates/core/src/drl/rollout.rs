use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agent::{Agent, PpoConfig, Trajectory};
use super::DrlError;
use crate::env::{
    preprocess, update_agent_state, urllc_score, ActionVector, AgentState, CsiFeature, EnvConfig, Environment,
    TraceRecord,
};
use crate::phy::{channel_uses, coherence_time, invert_error_for_power, pilot_count};
use crate::sched::{combined_prior, posterior_policy, ChannelThresholds, PriorConfig};
use crate::traffic::PacketTally;
use crate::Real;

/// Which channel information reaches the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMode {
    #[default]
    Estimated,
    Hidden,
    /// True current received powers of every device.
    Oracle,
}

/// How branch probabilities become an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Stochastic,
    Greedy,
}

/// Everything besides the networks that shapes a learned policy's decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySetup {
    pub use_prior: bool,
    pub csi: CsiMode,
    pub slots: usize,
    pub thresholds: ChannelThresholds,
    pub smoothing: f64,
    pub edf_on_true_buffers: bool,
}

/// η* from the target error at a fully loaded frame (B polled devices), τ*
/// from the coherence time in frames, unless the configuration pins them.
pub fn resolve_thresholds(env: &EnvConfig, prior: &PriorConfig) -> Result<ChannelThresholds, DrlError> {
    let phy = &env.phy;
    let power = match prior.power_threshold {
        Some(p) => p,
        None => {
            let pilots = pilot_count(phy.bandwidth, phy.delay_spread);
            let n = channel_uses(phy.bandwidth, pilots, phy.sic_limit, phy.subcarrier_spacing, phy.symbol_info_duration)?;
            invert_error_for_power(prior.target_error, n, phy.packet_bits, phy.noise_power())?
        }
    };
    let staleness = match prior.staleness_threshold {
        Some(s) => s,
        None => (coherence_time(phy.carrier_frequency, phy.device_speed)? / env.frame_duration()).round() as u32,
    };
    Ok(ChannelThresholds { power, staleness })
}

impl PolicySetup {
    pub fn new(env: &EnvConfig, prior: &PriorConfig, use_prior: bool, csi: CsiMode) -> Result<Self, DrlError> {
        Ok(Self {
            use_prior,
            csi,
            slots: env.phy.sic_limit,
            thresholds: resolve_thresholds(env, prior)?,
            smoothing: prior.smoothing,
            edf_on_true_buffers: prior.edf_on_true_buffers,
        })
    }
}

/// Result of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub rewards: Vec<u32>,
    pub tally: PacketTally,
    pub residual: u64,
    pub overloaded_frames: u64,
    pub trace: Option<Vec<TraceRecord>>,
}

/// Resets `env` and runs `length` frames, asking `decide` for every action.
/// Checks packet conservation at the end.
pub fn run_episode<R, F>(
    env: &mut Environment,
    length: u32,
    rng: &mut R,
    record_trace: bool,
    mut decide: F,
) -> Result<EpisodeOutcome, DrlError>
where
    R: Rng,
    F: FnMut(&Environment, &AgentState, &mut R) -> Result<ActionVector, DrlError>,
{
    let mut state = env.reset()?;
    let mut rewards = Vec::with_capacity(length as usize);
    let mut trace = record_trace.then(Vec::new);
    for _ in 0..length {
        let action = decide(env, &state, rng)?;
        let frame = env.state().frame;
        let out = env.step(&action)?;
        state = update_agent_state(&state, &out.observation, &action);
        rewards.push(out.reward);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRecord {
                frame,
                action: action.0.clone(),
                active: out.observation.active.clone(),
                decoded: out.observation.decoded.clone(),
                reward: out.reward,
            });
        }
    }
    env.check_conservation()?;
    Ok(EpisodeOutcome {
        rewards,
        tally: env.tally().clone(),
        residual: env.state().buffers.total(),
        overloaded_frames: env.overloaded_frames(),
        trace,
    })
}

/// Per-step bookkeeping of a learned-policy decision.
pub struct Decision<T> {
    pub action: ActionVector,
    pub features: Vec<T>,
    pub behavior_probs: Vec<T>,
}

/// Features, posterior and sampled action of the learned policy.
pub fn ppo_decide<T: Real, R: Rng + ?Sized>(
    agent: &Agent<T>,
    setup: &PolicySetup,
    sampling: Sampling,
    env: &Environment,
    state: &AgentState,
    rng: &mut R,
) -> Result<Decision<T>, DrlError> {
    let oracle;
    let csi = match setup.csi {
        CsiMode::Estimated => CsiFeature::Estimated,
        CsiMode::Hidden => CsiFeature::Hidden,
        CsiMode::Oracle => {
            oracle = env.true_received_powers();
            CsiFeature::Oracle(&oracle)
        }
    };
    let features: Vec<T> = preprocess(state, setup.thresholds.power, csi).into_iter().map(T::lit).collect();
    let pi = agent.branch_probs(&features)?;
    let q = if setup.use_prior {
        let buffers = if setup.edf_on_true_buffers { &env.state().buffers } else { &state.buffer_estimate };
        let prior = combined_prior(buffers, &state.power_estimate, &state.age_active, setup.slots, setup.thresholds, rng);
        posterior_policy(&pi, &prior, T::lit(setup.smoothing))
    } else {
        pi.clone()
    };
    let action = match sampling {
        Sampling::Stochastic => ActionVector(q.iter().map(|&p| rng.random::<f64>() < p.as_f64()).collect()),
        Sampling::Greedy => ActionVector(q.iter().map(|&p| p.as_f64() > 0.5).collect()),
    };
    Ok(Decision { action, features, behavior_probs: pi })
}

/// Collects one training trajectory with the posterior policy.
pub fn collect_trajectory<T: Real, R: Rng>(
    agent: &Agent<T>,
    setup: &PolicySetup,
    env: &mut Environment,
    length: u32,
    rng: &mut R,
) -> Result<(Trajectory<T>, EpisodeOutcome), DrlError> {
    let mut traj = Trajectory::default();
    let outcome = run_episode(env, length, rng, false, |env, state, rng| {
        let d = ppo_decide(agent, setup, Sampling::Stochastic, env, state, rng)?;
        traj.values.push(agent.state_value(&d.features)?);
        traj.features.push(d.features);
        traj.behavior_probs.push(d.behavior_probs);
        traj.actions.push(d.action.0.clone());
        Ok(d.action)
    })?;
    traj.rewards = outcome.rewards.iter().map(|&r| T::lit(f64::from(r))).collect();
    Ok((traj, outcome))
}

/// Aggregate of several evaluation episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub tally: PacketTally,
    pub residual: u64,
    pub episodes: u64,
    pub frames: u64,
    pub total_reward: u64,
    pub overloaded_frames: u64,
}

impl Evaluation {
    pub fn new(num_devices: usize) -> Self {
        Self {
            tally: PacketTally::new(num_devices),
            residual: 0,
            episodes: 0,
            frames: 0,
            total_reward: 0,
            overloaded_frames: 0,
        }
    }

    pub fn absorb(&mut self, outcome: &EpisodeOutcome) {
        self.tally.merge(&outcome.tally);
        self.residual += outcome.residual;
        self.episodes += 1;
        self.frames += outcome.rewards.len() as u64;
        self.total_reward += outcome.rewards.iter().map(|&r| u64::from(r)).sum::<u64>();
        self.overloaded_frames += outcome.overloaded_frames;
    }

    /// Delivered over packets whose fate was settled within the episodes
    /// (packets still buffered at the final frame are left out).
    pub fn score(&self) -> Result<f64, DrlError> {
        let delivered = self.tally.total_delivered();
        Ok(urllc_score(delivered, delivered + self.tally.total_expired())?)
    }

    /// Per-device scores under the same convention; `None` for devices without settled packets.
    pub fn device_scores(&self) -> Vec<Option<f64>> {
        self.tally
            .delivered
            .iter()
            .zip(&self.tally.expired)
            .map(|(&d, &e)| urllc_score(d, d + e).ok())
            .collect()
    }

    pub fn mean_reward(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.total_reward as f64 / self.frames as f64
        }
    }
}

/// Runs `episodes` evaluation episodes on a fresh environment seeded with
/// `seed`, with decisions drawn from an independent stream of the same seed.
pub fn evaluate<F>(
    env_config: &EnvConfig,
    seed: u64,
    episodes: u64,
    length: u32,
    mut decide: F,
) -> Result<Evaluation, DrlError>
where
    F: FnMut(&Environment, &AgentState, &mut ChaCha8Rng) -> Result<ActionVector, DrlError>,
{
    let mut env = Environment::new(env_config.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut eval = Evaluation::new(env_config.num_devices());
    for _ in 0..episodes {
        let outcome = run_episode(&mut env, length, &mut rng, false, &mut decide)?;
        eval.absorb(&outcome);
    }
    Ok(eval)
}

/// One point of a learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub seed: u64,
    pub update: u64,
    pub episodes_seen: u64,
    pub urllc_score: f64,
    pub mean_reward: f64,
}

/// Seed offset separating the evaluation environment from the training one.
pub const EVAL_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Trains `agent` for `config.episodes` episodes, evaluating the frozen
/// policy before training and every `config.eval_every_episodes` episodes.
///
/// `on_point` sees every curve point together with the agent that produced
/// it; `on_update` runs after every update.
#[allow(clippy::too_many_arguments)]
pub fn train<T, P, U>(
    agent: &mut Agent<T>,
    env_config: &EnvConfig,
    setup: &PolicySetup,
    config: &PpoConfig,
    seed: u64,
    eval_episodes: u64,
    mut on_point: P,
    mut on_update: U,
) -> Result<Vec<CurvePoint>, DrlError>
where
    T: Real,
    P: FnMut(&CurvePoint, &Agent<T>) -> Result<(), DrlError>,
    U: FnMut(&Agent<T>) -> Result<(), DrlError>,
{
    config.validate()?;
    let mut env = Environment::new(env_config.clone(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampling = if config.eval_greedy { Sampling::Greedy } else { Sampling::Stochastic };
    let mut curve = Vec::new();
    let mut point = |agent: &Agent<T>, curve: &mut Vec<CurvePoint>| -> Result<(), DrlError> {
        let eval = evaluate(env_config, seed.wrapping_add(EVAL_SEED_OFFSET), eval_episodes, config.episode_length, |env, state, rng| {
            Ok(ppo_decide(agent, setup, sampling, env, state, rng)?.action)
        })?;
        let p = CurvePoint {
            seed,
            update: agent.updates,
            episodes_seen: agent.episodes_seen,
            urllc_score: eval.score()?,
            mean_reward: eval.mean_reward(),
        };
        on_point(&p, agent)?;
        curve.push(p);
        Ok(())
    };
    point(agent, &mut curve)?;
    let mut next_eval = config.eval_every_episodes;
    while agent.episodes_seen < config.episodes {
        let batch = (config.trajectories_per_update as u64).min(config.episodes - agent.episodes_seen);
        let mut trajectories = Vec::with_capacity(batch as usize);
        for _ in 0..batch {
            let (traj, _) = collect_trajectory(agent, setup, &mut env, config.episode_length, &mut rng)?;
            trajectories.push(traj);
        }
        agent.episodes_seen += batch;
        agent.update(&trajectories, config, &mut rng)?;
        on_update(agent)?;
        if agent.episodes_seen >= next_eval || agent.episodes_seen >= config.episodes {
            point(agent, &mut curve)?;
            while next_eval <= agent.episodes_seen {
                next_eval += config.eval_every_episodes;
            }
        }
    }
    Ok(curve)
}
