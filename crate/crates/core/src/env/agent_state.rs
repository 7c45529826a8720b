use super::{ActionVector, Observation};
use crate::traffic::BufferMatrix;

/// Frames since an event; `None` until the event first happens.
pub type Age = Option<u32>;

/// Log10 range of η/η* mapped onto [−1, 1] in the feature vector.
pub const POWER_FEATURE_SPAN: f64 = 4.0;

/// Compact summary of the action-observation history kept by the scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub buffer_estimate: BufferMatrix,
    /// Last received power seen from each device while it was active.
    pub power_estimate: Vec<f64>,
    pub age_polled: Vec<Age>,
    pub age_active: Vec<Age>,
    pub age_success: Vec<Age>,
    pub last_reward: u32,
}

impl AgentState {
    pub fn new(num_devices: usize, depth: usize) -> Self {
        Self {
            buffer_estimate: BufferMatrix::new(num_devices, depth),
            power_estimate: vec![0.0; num_devices],
            age_polled: vec![None; num_devices],
            age_active: vec![None; num_devices],
            age_success: vec![None; num_devices],
            last_reward: 0,
        }
    }

    pub fn num_devices(&self) -> usize {
        self.power_estimate.len()
    }
}

fn tick(age: Age, hit: bool) -> Age {
    if hit {
        Some(1)
    } else {
        age.map(|a| a + 1)
    }
}

/// Folds one observation into the agent state.
///
/// Decoded devices report their buffer; the delivered packet is dropped from
/// that report. Every estimated row then ages by one frame, discarding
/// packets that would have expired.
pub fn update_agent_state(prev: &AgentState, obs: &Observation, prev_action: &ActionVector) -> AgentState {
    let mut next = prev.clone();
    for k in 0..prev.num_devices() {
        next.age_polled[k] = tick(prev.age_polled[k], prev_action.0[k]);
        next.age_active[k] = tick(prev.age_active[k], obs.active[k]);
        next.age_success[k] = tick(prev.age_success[k], obs.decoded[k]);
        if obs.active[k] {
            next.power_estimate[k] = obs.observed_powers[k];
        }
        if obs.decoded[k] {
            next.buffer_estimate.row_mut(k).copy_from_slice(obs.observed_buffers.row(k));
            next.buffer_estimate.remove_head(k);
        }
    }
    next.buffer_estimate.age();
    next.last_reward = obs.reward;
    next
}

/// Source of the channel block of the feature vector.
#[derive(Debug, Clone, Copy)]
pub enum CsiFeature<'a> {
    /// Last observed powers from the agent state.
    Estimated,
    /// Channel block zeroed.
    Hidden,
    /// True current powers of every device.
    Oracle(&'a [f64]),
}

fn reciprocal(age: Age) -> f64 {
    age.map_or(0.0, |a| 1.0 / f64::from(a))
}

fn power_feature(eta: f64, threshold: f64) -> f64 {
    if eta <= 0.0 || threshold <= 0.0 {
        return -1.0;
    }
    (eta / threshold).log10().clamp(-POWER_FEATURE_SPAN, POWER_FEATURE_SPAN) / POWER_FEATURE_SPAN
}

/// Network input of length 5K + 1:
/// `[1/d_hol | 1/τ^p | 1/τ^a | 1/τ^s | power | last reward]`.
///
/// Empty estimated buffers and never-seen events encode as 0. Powers are
/// log10(η/η*) scaled to [−1, 1], 0 for devices never heard from.
pub fn preprocess(state: &AgentState, power_threshold: f64, csi: CsiFeature<'_>) -> Vec<f64> {
    let k = state.num_devices();
    let mut out = Vec::with_capacity(5 * k + 1);
    out.extend((0..k).map(|j| state.buffer_estimate.head_of_line(j).map_or(0.0, |d| 1.0 / d as f64)));
    out.extend(state.age_polled.iter().map(|&a| reciprocal(a)));
    out.extend(state.age_active.iter().map(|&a| reciprocal(a)));
    out.extend(state.age_success.iter().map(|&a| reciprocal(a)));
    match csi {
        CsiFeature::Estimated => out.extend((0..k).map(|j| {
            if state.age_active[j].is_some() {
                power_feature(state.power_estimate[j], power_threshold)
            } else {
                0.0
            }
        })),
        CsiFeature::Hidden => out.extend(std::iter::repeat_n(0.0, k)),
        CsiFeature::Oracle(powers) => out.extend(powers.iter().map(|&p| power_feature(p, power_threshold))),
    }
    out.push(f64::from(state.last_reward));
    out
}
